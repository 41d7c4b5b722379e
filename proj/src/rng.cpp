#include "widthlab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace widthlab {

double Rng::uniform()
{
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

double Rng::normal()
{
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::uniform_int(std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = eng_();
    while (v >= limit)
        v = eng_();
    return v % n;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t counter)
{
    std::uint64_t h = splitmix64(master ^ fnv1a64(domain));
    return splitmix64(h ^ splitmix64(counter));
}

DiscreteSampler::DiscreteSampler(const Vec& weights)
{
    if (weights.size() == 0)
        throw std::invalid_argument("DiscreteSampler: empty weight vector");
    const auto m = static_cast<std::size_t>(weights.size());
    cum_.resize(m);
    prob_.resize(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double w = weights(static_cast<Eigen::Index>(i));
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("DiscreteSampler: weights must be finite and nonnegative");
        total += w;
        cum_[i] = total;
    }
    if (total <= 0.0)
        throw std::invalid_argument("DiscreteSampler: total weight must be positive");
    for (std::size_t i = 0; i < m; ++i)
        prob_[i] = weights(static_cast<Eigen::Index>(i)) / total;
}

int DiscreteSampler::operator()(Rng& rng) const
{
    const double u = rng.uniform() * cum_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    auto idx = static_cast<std::size_t>(it - cum_.begin());
    if (idx >= cum_.size())
        idx = cum_.size() - 1;
    return static_cast<int>(idx);
}

} // namespace widthlab
