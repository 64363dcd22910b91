#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace spikegrad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// scale * left * right^T, kept factored.
struct RankOne {
    Vector left;
    Vector right;
    double scale = 0.0;

    RankOne() = default;
    RankOne(Vector l, Vector r, double s) : left(std::move(l)), right(std::move(r)), scale(s) {}
    static RankOne zero(Index rows, Index cols);

    Index rows() const { return left.size(); }
    Index cols() const { return right.size(); }
    Matrix dense() const;
    double norm() const;  // spectral == Frobenius for rank one
    RankOne scaled(double c) const { return RankOne(left, right, scale * c); }
};

struct Svd {
    Vector values;
    Matrix left;   // columns are left singular vectors
    Matrix right;  // columns are right singular vectors
};

// Sum of rank-one terms with an exact thin SVD via QR of the factors.
class LowRank {
public:
    LowRank(Index rows, Index cols) : rows_(rows), cols_(cols) {}
    void add(const RankOne& term);
    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    const std::vector<RankOne>& terms() const { return terms_; }
    Matrix dense() const;
    Svd svd() const;

private:
    Index rows_, cols_;
    std::vector<RankOne> terms_;
};

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Callers write
// results into slot i, so output order never depends on scheduling.
void parallel_for(Index count, int jobs, const std::function<void(Index)>& fn);

int default_jobs();

// FNV-1a over the raw bytes; used to check that paired runs see identical inputs.
std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ull);
std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h = 0xcbf29ce484222325ull);

// Least squares y = c + slope * x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spikegrad
