#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "widthlab/common.hpp"

namespace widthlab {

// Deterministic random source. The transforms (uniform, Box-Muller normal,
// bounded integers) are implemented here rather than with std::*_distribution
// because the standard leaves those unspecified and results must reproduce
// bit-exactly from a seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on [0, 1) with 53 random bits
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n);
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Counter-based seed split: independent streams for (master, domain, counter)
// so execution order of parallel tasks cannot change any result.
std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t counter = 0);

// Sampler for a fixed discrete distribution over {0, .., M-1}; probabilities
// need not be normalized. Binary search over the cumulative table.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const Vec& weights);
    int operator()(Rng& rng) const;
    double prob(int i) const { return prob_[static_cast<std::size_t>(i)]; }

private:
    std::vector<double> cum_;
    std::vector<double> prob_;
};

} // namespace widthlab
