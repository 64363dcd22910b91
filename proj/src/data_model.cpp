#include "spikegrad/data_model.hpp"

#include <algorithm>
#include <cmath>

#include "spikegrad/errors.hpp"

namespace spikegrad {

double SpikedDataSpec::zeta() const {
    return zeta_zero ? 0.0 : std::pow(static_cast<double>(n), nu);
}

void SpikedDataSpec::validate() const {
    if (n < 1 || d < 1) throw InvalidArgument("SpikedDataSpec: n and d must be positive");
    if (!(nu >= 0.0) || !(alpha >= 0.0))
        throw InvalidArgument("SpikedDataSpec: nu and alpha must be nonnegative");
    if (q.size() != d) throw ShapeMismatch("SpikedDataSpec: q must have length d");
    if (std::abs(q.norm() - 1.0) > 1e-12) throw InvalidArgument("SpikedDataSpec: q must be a unit vector");
}

SpikedDataSpec make_data_spec(Index n, Index d, double nu, double alpha, Rng& rng, bool zeta_zero) {
    SpikedDataSpec spec;
    spec.n = n;
    spec.d = d;
    spec.nu = nu;
    spec.alpha = alpha;
    spec.zeta_zero = zeta_zero;
    spec.seed = rng.seed();
    spec.q = random_unit_vector(d, rng);
    spec.q /= spec.q.norm();
    return spec;
}

Vector bulk_eigenvalues(Index d, double alpha) {
    if (d < 1) throw InvalidArgument("bulk_eigenvalues: d must be positive");
    Vector out(d);
    for (Index k = 0; k < d; ++k) out(k) = std::pow(static_cast<double>(k + 1), -alpha);
    return out;
}

DataSample sample_spiked_data(const SpikedDataSpec& spec, Rng& rng) {
    spec.validate();
    DataSample s;
    const Vector scale = bulk_eigenvalues(spec.d, spec.alpha).cwiseSqrt();
    s.X_B = rng.normal_matrix(spec.n, spec.d) * scale.asDiagonal();
    s.z = rng.normal_vector(spec.n);
    s.zeta = spec.zeta();
    s.q = spec.q;
    s.X = s.X_B;
    if (!spec.zeta_zero) s.X.noalias() += s.zeta * s.z * s.q.transpose();
    return s;
}

DataSample sample_spiked_data(const SpikedDataSpec& spec) {
    Rng rng(spec.seed);
    return sample_spiked_data(spec, rng);
}

Matrix center(const Matrix& X) {
    if (X.rows() < 1) throw InvalidArgument("center: need at least one row");
    const Eigen::RowVectorXd mean = X.colwise().mean();
    return X.rowwise() - mean;
}

Vector covariance_eigenvalues(const Matrix& X) {
    const double n = static_cast<double>(X.rows());
    Matrix C;
    if (X.cols() <= X.rows())
        C = X.transpose() * X / n;
    else
        C = X * X.transpose() / n;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C, Eigen::EigenvaluesOnly);
    Vector ev = eig.eigenvalues().reverse();
    return ev;
}

double loglog_alpha(const Vector& ev, Index first_rank, Index last_rank, double floor) {
    std::vector<double> x, y;
    for (Index k = first_rank; k <= last_rank; ++k) {
        x.push_back(std::log(static_cast<double>(k)));
        y.push_back(std::log(std::max(ev(k - 1), floor)));
    }
    return -fit_line(x, y).slope;
}

namespace {

// Shape of a simulated N(0, diag(k^-alpha)) spectrum at the same (n, d),
// compared to the observed one after removing the mean log level.
class BulkShapeMatcher {
public:
    BulkShapeMatcher(const Vector& observed, Index n, Index d, Index first, Index last,
                     const SpikeEstimateOptions& opt)
        : n_(n), d_(d), first_(first), last_(last), floor_(opt.floor) {
        target_ = window_logs(observed);
        Rng rng(opt.simulation_seed);
        G_ = rng.normal_matrix(n, d);
        if (d <= n) gram_ = G_.transpose() * G_ / static_cast<double>(n);
    }

    double loss(double alpha) const {
        const Vector s = bulk_eigenvalues(d_, alpha).cwiseSqrt();
        Matrix C;
        if (d_ <= n_)
            C = s.asDiagonal() * gram_ * s.asDiagonal();
        else
            C = G_ * s.cwiseAbs2().asDiagonal() * G_.transpose() / static_cast<double>(n_);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(C, Eigen::EigenvaluesOnly);
        const Vector sim = window_logs(eig.eigenvalues().reverse());
        return (sim - target_).squaredNorm();
    }

private:
    Vector window_logs(const Vector& ev) const {
        Vector out(last_ - first_ + 1);
        for (Index k = first_; k <= last_; ++k) out(k - first_) = std::log(std::max(ev(k - 1), floor_));
        out.array() -= out.mean();
        return out;
    }

    Index n_, d_, first_, last_;
    double floor_;
    Vector target_;
    Matrix G_, gram_;
};

double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // The boundary itself is a legitimate answer (alpha = 0 for white bulks).
    const double flo = f(lo);
    return flo <= std::min(fc, fd) ? lo : mid;
}

}  // namespace

SpikeEstimate estimate_spike_exponent(const Matrix& X, const SpikeEstimateOptions& opt) {
    const Index n = X.rows(), d = X.cols();
    if (n < 2) throw InvalidArgument("estimate_spike_exponent: need n >= 2");
    const Vector ev = covariance_eigenvalues(X);
    const Index r = ev.size();

    SpikeEstimate est;
    est.top_eigenvalue = ev(0);
    if (!(ev(0) > opt.floor)) throw DegenerateSpectrum("estimate_spike_exponent: top eigenvalue below floor");
    est.bulk_eigenvalues = ev.tail(r - 1);

    double median = 0.0;
    if (r > 1) {
        std::vector<double> bulk(est.bulk_eigenvalues.data(), est.bulk_eigenvalues.data() + r - 1);
        const std::size_t mid = bulk.size() / 2;
        std::nth_element(bulk.begin(), bulk.begin() + mid, bulk.end());
        median = bulk[mid];
        if (bulk.size() % 2 == 0) {
            const double lower = *std::max_element(bulk.begin(), bulk.begin() + mid);
            median = 0.5 * (median + lower);
        }
    }
    const double zeta2 = std::max(ev(0) - median, opt.floor);
    est.nu_hat = 0.5 * std::log(zeta2) / std::log(static_cast<double>(n));

    const Index last = static_cast<Index>(std::floor(opt.fit_fraction * static_cast<double>(std::min(n, d))));
    if (last < 4) {
        est.alpha_hat = 0.0;
        return est;
    }
    if (opt.alpha_method == AlphaMethod::loglog_ols) {
        est.alpha_hat = loglog_alpha(ev, 2, last, opt.floor);
    } else {
        BulkShapeMatcher matcher(ev, n, d, 2, last, opt);
        est.alpha_hat = golden_section_min([&](double a) { return matcher.loss(a); }, 0.0, opt.alpha_max, 1e-3);
    }
    return est;
}

}  // namespace spikegrad
