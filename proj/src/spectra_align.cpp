#include "spikegrad/spectra_align.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <lapacke.h>

#include "spikegrad/errors.hpp"
#include "spikegrad/rng.hpp"

namespace spikegrad {

Svd singular_spectrum(const Matrix& M, Index k) {
    if (!M.allFinite()) throw InvalidArgument("singular_spectrum: matrix has non-finite entries");
    const Index full = std::min(M.rows(), M.cols());
    if (k <= 0 || k > full) k = full;
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out;
    out.values = svd.singularValues().head(k);
    out.left = svd.matrixU().leftCols(k);
    out.right = svd.matrixV().leftCols(k);
    return out;
}

Vector singular_values(const Matrix& M) {
    if (!M.allFinite()) throw InvalidArgument("singular_values: matrix has non-finite entries");
    Eigen::BDCSVD<Matrix> svd(M);
    return svd.singularValues();
}

namespace {

Matrix orthonormalize(const Matrix& Y) {
    Eigen::HouseholderQR<Matrix> qr(Y);
    return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

}  // namespace

Svd top_singular_triplets(const Matrix& M, Index k, const IterativeSvdOptions& opt) {
    const Index rows = M.rows(), cols = M.cols();
    const Index full = std::min(rows, cols);
    if (k < 1 || k > full) throw InvalidArgument("top_singular_triplets: k out of range");
    const Index b = std::min(full, k + opt.oversample);
    if (b == full && full <= 64) return singular_spectrum(M, k);

    Rng rng(opt.seed);
    Matrix Omega = orthonormalize(rng.normal_matrix(cols, b));
    Svd out;
    for (Index it = 0; it < opt.max_iterations; ++it) {
        const Matrix Q = orthonormalize(M * Omega);
        const Matrix Z = M.transpose() * Q;  // cols x b, so Q^T M = Z^T
        Eigen::JacobiSVD<Matrix> small(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.values = small.singularValues().head(k);
        out.right = small.matrixU().leftCols(k);
        out.left = Q * small.matrixV().leftCols(k);
        const double top = out.values(0);
        if (!(top > 0.0)) return out;
        const Matrix resid = M * out.right - out.left * out.values.asDiagonal();
        double worst = 0.0;
        for (Index j = 0; j < k; ++j) worst = std::max(worst, resid.col(j).norm() / top);
        if (worst <= opt.tolerance) return out;
        Omega = orthonormalize(Z);
    }
    throw ConvergenceFailure("top_singular_triplets: no convergence within the iteration budget");
}

double alignment(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw ShapeMismatch("alignment: vectors differ in length");
    const double nu = u.norm(), nv = v.norm();
    if (!(nu > 0.0) || !(nv > 0.0)) throw ZeroVector("alignment: zero vector");
    return std::min(1.0, std::abs(u.dot(v)) / (nu * nv));
}

std::string to_string(SpikeLabel label) {
    switch (label) {
    case SpikeLabel::residue: return "residue";
    case SpikeLabel::data: return "data";
    case SpikeLabel::target: return "target";
    case SpikeLabel::teacher: return "teacher";
    case SpikeLabel::unmatched: return "unmatched";
    }
    return "unmatched";
}

SpikeLabel parse_spike_label(std::string_view name) {
    if (name == "residue") return SpikeLabel::residue;
    if (name == "data") return SpikeLabel::data;
    if (name == "target") return SpikeLabel::target;
    if (name == "teacher") return SpikeLabel::teacher;
    if (name == "unmatched") return SpikeLabel::unmatched;
    throw InvalidArgument("unknown spike label '" + std::string(name) + "'");
}

std::optional<SpikeLabel> SpectralReport::top_label() const {
    if (spikes.empty()) return std::nullopt;
    return spikes.front().label;
}

bool SpectralReport::has_spike(SpikeLabel label) const {
    return std::any_of(spikes.begin(), spikes.end(), [&](const SpikeInfo& s) { return s.label == label; });
}

double SpectralReport::overlay_for(SpikeLabel label) const {
    for (std::size_t i = 0; i < overlay_labels.size(); ++i)
        if (overlay_labels[i] == label) return overlay_values(static_cast<Index>(i));
    return 0.0;
}

double SpectralReport::top_alignment(SpikeLabel label) const {
    for (std::size_t c = 0; c < candidate_labels.size(); ++c)
        if (candidate_labels[c] == label) return top_alignments(static_cast<Index>(c));
    return 0.0;
}

Index detect_spike_count(const Vector& values, const ClassifyOptions& opt) {
    if (values.size() == 0 || !(values(0) > 0.0)) return 0;
    const double tiny = 1e-12 * values(0);
    Index count = 0;
    // A spike needs a value below it to stand out from.
    const Index last = std::min<Index>(opt.max_spikes, values.size() - 1);
    for (Index i = 1; i <= last; ++i) {
        const double above = values(i - 1);
        const double below = values(i);
        if (above <= tiny) break;
        if (below <= tiny || above >= opt.gap_factor * below) count = i;
    }
    return count;
}

std::vector<SpikeLabel> greedy_labels(const Matrix& table, const std::vector<SpikeLabel>& labels, double threshold) {
    std::vector<SpikeLabel> out(static_cast<std::size_t>(table.rows()), SpikeLabel::unmatched);
    std::vector<bool> used(labels.size(), false);
    for (Index i = 0; i < table.rows(); ++i) {
        Index best = -1;
        double best_score = threshold;
        for (Index c = 0; c < table.cols(); ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            if (table(i, c) >= best_score) {
                best_score = table(i, c);
                best = c;
            }
        }
        if (best >= 0) {
            used[static_cast<std::size_t>(best)] = true;
            out[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(best)];
        }
    }
    return out;
}

namespace {

Index label_column(const std::vector<SpikeLabel>& labels, SpikeLabel label) {
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (labels[c] == label) return static_cast<Index>(c);
    return -1;
}

// Detect on the spectrum, label B's components, pair them with G's spikes by position.
void finish_report(SpectralReport& rep, const ClassifyOptions& opt) {
    rep.overlay_labels = greedy_labels(rep.b_alignment, rep.candidate_labels, opt.threshold);
    rep.spikes.clear();
    const Index k = detect_spike_count(rep.singular_values, opt);
    for (Index i = 0; i < k; ++i) {
        SpikeInfo s;
        s.rank = i + 1;
        s.value = rep.singular_values(i);
        const bool has_b = i < rep.b_alignment.rows();
        const bool has_g = i < rep.g_alignment.rows();
        if (has_b) {
            s.label = rep.overlay_labels[static_cast<std::size_t>(i)];
            s.overlay = rep.overlay_values(i);
        }
        const Index c = label_column(rep.candidate_labels, s.label);
        if (c >= 0) {
            s.alignment = rep.b_alignment(i, c);
            s.g_alignment = has_g ? rep.g_alignment(i, c) : 0.0;
        } else {
            s.alignment = has_b && rep.b_alignment.cols() > 0 ? rep.b_alignment.row(i).maxCoeff() : 0.0;
            s.g_alignment = has_g && rep.g_alignment.cols() > 0 ? rep.g_alignment.row(i).maxCoeff() : 0.0;
        }
        rep.spikes.push_back(s);
    }
}

Matrix alignment_table(const Matrix& vectors, const std::vector<Candidate>& candidates) {
    Matrix t(vectors.cols(), static_cast<Index>(candidates.size()));
    for (Index i = 0; i < vectors.cols(); ++i)
        for (std::size_t c = 0; c < candidates.size(); ++c)
            t(i, static_cast<Index>(c)) = vectors.col(i).norm() > 0.0 ? alignment(vectors.col(i), candidates[c].direction) : 0.0;
    return t;
}

SpectralReport report_skeleton(const Matrix& G, const std::vector<Candidate>& candidates, const ClassifyOptions& opt) {
    for (const auto& c : candidates) {
        if (c.direction.size() != G.rows()) throw ShapeMismatch("classify_spikes: candidate length differs from G's rows");
        if (!(c.direction.norm() > 0.0)) throw ZeroVector("classify_spikes: zero candidate direction");
    }
    SpectralReport rep;
    for (const auto& c : candidates) rep.candidate_labels.push_back(c.label);
    rep.singular_values = singular_values(G);
    const Index k0 = std::min<Index>(std::max<Index>(opt.max_spikes, 1), rep.singular_values.size());
    if (k0 > 0 && rep.singular_values(0) > 0.0) {
        rep.top_left_vectors = top_singular_triplets(G, k0).left;
    } else {
        rep.top_left_vectors = Matrix::Zero(G.rows(), 0);
    }
    rep.g_alignment = alignment_table(rep.top_left_vectors, candidates);
    rep.top_alignments = rep.g_alignment.rows() > 0 ? Vector(rep.g_alignment.row(0).transpose())
                                                    : Vector::Zero(static_cast<Index>(candidates.size()));
    return rep;
}

}  // namespace

SpectralReport classify_spikes(const Matrix& G, const LowRank& B, const std::vector<Candidate>& candidates,
                               const ClassifyOptions& opt) {
    if (B.rows() != G.rows() || B.cols() != G.cols()) throw ShapeMismatch("classify_spikes: B shape differs from G");
    SpectralReport rep = report_skeleton(G, candidates, opt);
    const Svd b = B.svd();
    Index keep = 0;
    const double bmax = b.values.size() > 0 ? b.values(0) : 0.0;
    while (keep < b.values.size() && b.values(keep) > 1e-12 * bmax && b.values(keep) > 0.0) ++keep;
    rep.overlay_values = b.values.head(keep);
    rep.b_alignment = alignment_table(b.left.leftCols(keep), candidates);
    finish_report(rep, opt);
    return rep;
}

SpectralReport classify_spikes(const Matrix& G, const std::vector<Candidate>& candidates, const ClassifyOptions& opt) {
    SpectralReport rep = report_skeleton(G, candidates, opt);
    const Index k = rep.top_left_vectors.cols();
    rep.overlay_values = rep.singular_values.head(k);
    rep.b_alignment = rep.g_alignment;
    finish_report(rep, opt);
    return rep;
}

SpectralReport aggregate_reports(const std::vector<SpectralReport>& reports, const ClassifyOptions& opt) {
    if (reports.empty()) throw InvalidArgument("aggregate_reports: no reports");
    SpectralReport agg;
    agg.candidate_labels = reports.front().candidate_labels;
    const Index nc = static_cast<Index>(agg.candidate_labels.size());
    Index len = reports.front().singular_values.size();
    Index g_rows = 0, b_rows = 0;
    for (const auto& r : reports) {
        if (r.candidate_labels != agg.candidate_labels) throw InvalidArgument("aggregate_reports: candidate sets differ");
        len = std::min(len, r.singular_values.size());
        g_rows = std::max(g_rows, r.g_alignment.rows());
        b_rows = std::max(b_rows, r.b_alignment.rows());
    }
    agg.singular_values = Vector::Zero(len);
    agg.top_alignments = Vector::Zero(nc);
    agg.g_alignment = Matrix::Zero(g_rows, nc);
    agg.b_alignment = Matrix::Zero(b_rows, nc);
    agg.overlay_values = Vector::Zero(b_rows);
    Vector g_count = Vector::Zero(g_rows), b_count = Vector::Zero(b_rows);
    for (const auto& r : reports) {
        agg.singular_values += r.singular_values.head(len);
        agg.top_alignments += r.top_alignments;
        for (Index i = 0; i < r.g_alignment.rows(); ++i) {
            agg.g_alignment.row(i) += r.g_alignment.row(i);
            g_count(i) += 1;
        }
        for (Index i = 0; i < r.b_alignment.rows(); ++i) {
            agg.b_alignment.row(i) += r.b_alignment.row(i);
            agg.overlay_values(i) += r.overlay_values(i);
            b_count(i) += 1;
        }
    }
    const double t = static_cast<double>(reports.size());
    agg.singular_values /= t;
    agg.top_alignments /= t;
    for (Index i = 0; i < g_rows; ++i) agg.g_alignment.row(i) /= g_count(i);
    for (Index i = 0; i < b_rows; ++i) {
        agg.b_alignment.row(i) /= b_count(i);
        agg.overlay_values(i) /= b_count(i);
    }
    agg.top_left_vectors = Matrix::Zero(0, 0);
    finish_report(agg, opt);
    return agg;
}

Vector principal_angles(const Matrix& U, const Matrix& V) {
    if (U.rows() != V.rows()) throw ShapeMismatch("principal_angles: bases live in different dimensions");
    const auto check = [](const Matrix& B, const char* name) {
        const Matrix gram = B.transpose() * B;
        if ((gram - Matrix::Identity(B.cols(), B.cols())).cwiseAbs().maxCoeff() > 1e-8)
            throw NotOrthonormal(std::string("principal_angles: ") + name + " is not orthonormal");
    };
    check(U, "U");
    check(V, "V");
    Eigen::JacobiSVD<Matrix> svd(U.transpose() * V);
    const Vector s = svd.singularValues();
    Vector angles(s.size());
    for (Index i = 0; i < s.size(); ++i)
        angles(i) = std::acos(std::clamp(s(i), 0.0, 1.0)) * 180.0 / std::numbers::pi;
    std::sort(angles.data(), angles.data() + angles.size());
    return angles;
}

Matrix top_right_subspace(const Matrix& W, Index k) {
    const Index d = W.cols();
    if (k < 1 || k > std::min(W.rows(), d)) throw InvalidArgument("top_right_subspace: k out of range");
    // Top eigenvectors of the Gram matrix. Weight spectra usually have no gap
    // after k, which stalls subspace iteration; dsyevr does not care.
    Matrix gram = W.transpose() * W;
    const auto n = static_cast<lapack_int>(d);
    lapack_int found = 0;
    Vector values(d);
    Matrix vectors(d, k);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, gram.data(), n, 0.0, 0.0, n - static_cast<lapack_int>(k) + 1,
                       n, 0.0, &found, values.data(), vectors.data(), n, support.data());
    if (info != 0 || found != k) throw ConvergenceFailure("top_right_subspace: dsyevr failed");
    return vectors.rowwise().reverse();
}

ConvFilterGradient conv_filter_gradient(const Matrix& G, Index k) {
    const Index m = G.rows(), d = G.cols();
    if (k < 1 || m != d - k + 1) throw ShapeMismatch("conv_filter_gradient: need m = d - k + 1");
    const auto correlate = [&](const Vector& u, const Vector& v) {
        Vector c(k);
        for (Index l = 0; l < k; ++l) c(l) = u.dot(v.segment(l, m));
        return c;
    };
    ConvFilterGradient out;
    out.filter_grad = Vector::Zero(k);
    for (Index l = 0; l < k; ++l)
        for (Index i = 0; i < m; ++i) out.filter_grad(l) += G(i, i + l);
    const double norm = out.filter_grad.norm();
    if (!(norm > 0.0)) return out;

    const Svd svd = singular_spectrum(G, std::min<Index>(2, std::min(m, d)));
    Matrix basis(k, 0);
    for (Index j = 0; j < svd.values.size(); ++j) {
        if (!(svd.values(j) > 1e-12 * svd.values(0))) continue;
        basis.conservativeResize(k, basis.cols() + 1);
        basis.col(basis.cols() - 1) = correlate(svd.left.col(j), svd.right.col(j));
    }
    if (basis.cols() == 0) {
        out.subspace_residual = 1.0;
        return out;
    }
    const Vector coef = basis.colPivHouseholderQr().solve(out.filter_grad);
    out.subspace_residual = (out.filter_grad - basis * coef).norm() / norm;
    return out;
}

}  // namespace spikegrad
