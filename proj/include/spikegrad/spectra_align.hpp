#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikegrad/linalg.hpp"

namespace spikegrad {

// Top-k singular triplets by a dense divide-and-conquer SVD. k <= 0 means all.
Svd singular_spectrum(const Matrix& M, Index k = -1);
Vector singular_values(const Matrix& M);

struct IterativeSvdOptions {
    Index oversample = 8;
    Index max_iterations = 2000;
    double tolerance = 1e-10;  // relative residual ||M v - s u|| / s
    std::uint64_t seed = 0x5eed;
};

// Block subspace iteration with a Rayleigh-Ritz step. Throws ConvergenceFailure.
Svd top_singular_triplets(const Matrix& M, Index k, const IterativeSvdOptions& options = {});

double alignment(const Vector& u, const Vector& v);

enum class SpikeLabel { residue, data, target, teacher, unmatched };
std::string to_string(SpikeLabel label);
SpikeLabel parse_spike_label(std::string_view name);

struct Candidate {
    SpikeLabel label;
    Vector direction;
};

struct ClassifyOptions {
    double threshold = 0.5;    // minimum cosine for a label
    double gap_factor = 1.2;   // spike if sigma_k / sigma_{k+1} >= gap_factor
    Index max_spikes = 4;
};

struct SpikeInfo {
    SpikeLabel label = SpikeLabel::unmatched;
    Index rank = 0;              // 1-based position in the spectrum of G
    double value = 0.0;          // singular value of G
    double overlay = 0.0;        // matched singular value of the spike part B
    double alignment = 0.0;      // cosine of B's component with its label
    double g_alignment = 0.0;    // cosine of G's own singular vector with the same label
};

struct SpectralReport {
    Vector singular_values;
    Matrix top_left_vectors;
    std::vector<SpikeInfo> spikes;
    std::vector<SpikeLabel> candidate_labels;
    Vector top_alignments;        // G's top left vector against each candidate
    Vector overlay_values;        // singular values of B
    std::vector<SpikeLabel> overlay_labels;
    Matrix b_alignment;           // B components x candidates
    Matrix g_alignment;           // G's leading vectors x candidates

    std::optional<SpikeLabel> top_label() const;
    bool has_spike(SpikeLabel label) const;
    double overlay_for(SpikeLabel label) const;  // 0 when the label does not occur
    double top_alignment(SpikeLabel label) const;
};

// sigma_k / sigma_{k+1} gap rule; returns the number of leading spikes.
Index detect_spike_count(const Vector& values, const ClassifyOptions& options);

// Greedy by singular value, each candidate used at most once.
std::vector<SpikeLabel> greedy_labels(const Matrix& alignment_table, const std::vector<SpikeLabel>& labels,
                                      double threshold);

// B is the spike part (S1 + S12 + S2, plus the Jacobian spike when active).
SpectralReport classify_spikes(const Matrix& G, const LowRank& B, const std::vector<Candidate>& candidates,
                               const ClassifyOptions& options = {});
// Without a decomposition, G's own leading vectors stand in for B.
SpectralReport classify_spikes(const Matrix& G, const std::vector<Candidate>& candidates,
                               const ClassifyOptions& options = {});

// Mean spectrum and mean alignment tables across trials, then relabel.
SpectralReport aggregate_reports(const std::vector<SpectralReport>& reports, const ClassifyOptions& options = {});

// Degrees, nondecreasing.
Vector principal_angles(const Matrix& U, const Matrix& V);
// Orthonormal basis of the top-k right singular subspace (rows of W span it).
Matrix top_right_subspace(const Matrix& W, Index k);

struct ConvFilterGradient {
    Vector filter_grad;
    double subspace_residual = 0.0;
};

// G is m x d with m = d - k + 1 (1-D valid convolution, stride 1).
ConvFilterGradient conv_filter_gradient(const Matrix& G, Index k);

}  // namespace spikegrad
