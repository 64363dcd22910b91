#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace spikegrad {

// Philox4x32-10 block cipher (Salmon et al.) used as a counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based stream: (seed, stream id) fixes the sequence. Streams for
// (seed, scenario, trial, ...) come from chained split() calls, so no two
// consumers share state and results do not depend on scheduling.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    Rng split(std::uint64_t tag) const;

    std::uint64_t next_u64();
    result_type operator()() { return next_u64(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    double uniform();  // [0, 1)
    double normal();   // N(0, 1), Box-Muller
    double sign();     // +1 or -1 with equal probability

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev = 1.0);
    Eigen::VectorXd normal_vector(Eigen::Index n, double stddev = 1.0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int buf_pos_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

Eigen::VectorXd random_unit_vector(Eigen::Index d, Rng& rng);

}  // namespace spikegrad
