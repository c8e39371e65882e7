#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/seed_seq.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace stvc {

/// Seedable generator used by every sampler in the library.
///
/// The engine is the 64-bit Mersenne Twister and the variates come from
/// Boost.Random's distribution implementations (ziggurat normal,
/// Marsaglia-Tsang gamma). Both are plain code with no platform-specific
/// branches, so a seed reproduces the same stream on every platform.
class Rng {
public:
    static constexpr std::string_view kName =
        "mt19937_64+boost.normal(ziggurat)+boost.gamma";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream derived from (seed, key), used when draws are
    /// partitioned per unit.
    Rng(std::uint64_t seed, std::uint64_t key) {
        boost::random::seed_seq seq{
            static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
        engine_.seed(seq);
    }

    double standard_normal() { return normal_(engine_); }

    /// Normal draw parameterized by mean and precision.
    double normal(double mean, double precision) {
        return mean + standard_normal() / std::sqrt(precision);
    }

    double uniform(double lo, double hi) {
        boost::random::uniform_real_distribution<double> dist(lo, hi);
        return dist(engine_);
    }

    /// Gamma draw with shape-rate parameterization.
    double gamma(double shape, double rate) {
        boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
        return dist(engine_);
    }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

inline constexpr double kLogTwoPi = 1.8378770664093454836;

/// Log density of N(x | mean, precision).
inline double normal_log_density(double x, double mean, double precision) {
    const double d = x - mean;
    return 0.5 * std::log(precision) - 0.5 * kLogTwoPi - 0.5 * precision * d * d;
}

/// Log density of Ga(x | shape, rate).
inline double gamma_log_density(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace stvc
