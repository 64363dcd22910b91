#include "spikegrad/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "spikegrad/errors.hpp"

namespace spikegrad {

RankOne RankOne::zero(Index rows, Index cols) {
    return RankOne(Vector::Zero(rows), Vector::Zero(cols), 0.0);
}

Matrix RankOne::dense() const {
    return scale * left * right.transpose();
}

double RankOne::norm() const {
    return std::abs(scale) * left.norm() * right.norm();
}

void LowRank::add(const RankOne& term) {
    if (term.rows() != rows_ || term.cols() != cols_)
        throw ShapeMismatch("LowRank::add: term shape differs from accumulator");
    terms_.push_back(term);
}

Matrix LowRank::dense() const {
    Matrix out = Matrix::Zero(rows_, cols_);
    for (const auto& t : terms_) out.noalias() += t.scale * t.left * t.right.transpose();
    return out;
}

Svd LowRank::svd() const {
    const Index k = static_cast<Index>(terms_.size());
    Svd out;
    if (k == 0) {
        out.values = Vector::Zero(0);
        out.left = Matrix::Zero(rows_, 0);
        out.right = Matrix::Zero(cols_, 0);
        return out;
    }
    Matrix L(rows_, k), R(cols_, k);
    for (Index i = 0; i < k; ++i) {
        L.col(i) = terms_[i].scale * terms_[i].left;
        R.col(i) = terms_[i].right;
    }
    // B = L R^T = Ql (Rl Rr^T) Qr^T; the k x k core carries the spectrum.
    Eigen::HouseholderQR<Matrix> ql(L), qr(R);
    const Index kl = std::min(rows_, k), kr = std::min(cols_, k);
    Matrix Ql = ql.householderQ() * Matrix::Identity(rows_, kl);
    Matrix Qr = qr.householderQ() * Matrix::Identity(cols_, kr);
    Matrix Rl = ql.matrixQR().topRows(kl).triangularView<Eigen::Upper>();
    Matrix Rr = qr.matrixQR().topRows(kr).triangularView<Eigen::Upper>();
    Matrix core = Rl * Rr.transpose();
    Eigen::JacobiSVD<Matrix> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.values = svd.singularValues();
    out.left = Ql * svd.matrixU();
    out.right = Qr * svd.matrixV();
    return out;
}

void parallel_for(Index count, int jobs, const std::function<void(Index)>& fn) {
    if (count <= 0) return;
    const Index workers = std::clamp<Index>(jobs, 1, count);
    if (workers == 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const Index i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

int default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h) {
    const std::int64_t dims[2] = {m.rows(), m.cols()};
    h = hash_bytes(dims, sizeof(dims), h);
    return hash_bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ShapeMismatch("fit_line: x and y differ in length");
    if (x.size() < 2) throw DegenerateFit("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw DegenerateFit("fit_line: x values are all equal");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - fit.intercept - fit.slope * x[i];
        sse += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace spikegrad
