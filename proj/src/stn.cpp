#include "stvc/stn.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace stvc {

namespace {

/// Streaming co-moments for a Pearson correlation.
class PairMoments {
public:
    void add(double x, double y) {
        ++count_;
        const double dx = x - mean_x_;
        mean_x_ += dx / count_;
        const double dy = y - mean_y_;
        mean_y_ += dy / count_;
        m2_x_ += dx * (x - mean_x_);
        m2_y_ += dy * (y - mean_y_);
        co_ += dx * (y - mean_y_);
    }
    double correlation() const { return co_ / std::sqrt(m2_x_ * m2_y_); }

private:
    double count_ = 0.0;
    double mean_x_ = 0.0;
    double mean_y_ = 0.0;
    double m2_x_ = 0.0;
    double m2_y_ = 0.0;
    double co_ = 0.0;
};

struct WeightSums {
    double a = 0.0;
    double b = 0.0;
    double shared = 0.0;
};

WeightSums weight_sums(const STNParams& p, const NeighborhoodSystem& sys, const SiteIndex& a,
                       const SiteIndex& b) {
    p.validate(sys);
    if (!sys.contains(a) || !sys.contains(b)) throw std::out_of_range("site outside the lattice");
    const auto fa = sys.forward_flat(sys.flat(a));
    const auto fb = sys.forward_flat(sys.flat(b));
    std::vector<std::size_t> common;
    std::set_intersection(fa.begin(), fa.end(), fb.begin(), fb.end(), std::back_inserter(common));
    WeightSums s;
    for (const auto j : fa) s.a += p.c[j];
    for (const auto j : fb) s.b += p.c[j];
    for (const auto j : common) s.shared += p.c[j];
    return s;
}

void check_reps(std::int64_t reps) {
    if (reps < 10000) throw std::invalid_argument("Monte Carlo correlation needs at least 10^4 replications");
}

}  // namespace

STNParams STNParams::constant(const NeighborhoodSystem& sys, double m0, double c0, double weight) {
    return STNParams{m0, c0, std::vector<double>(sys.size(), weight)};
}

void STNParams::validate(const NeighborhoodSystem& sys) const {
    if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
    if (c.size() != sys.size()) {
        throw std::invalid_argument("weights defined for " + std::to_string(c.size()) +
                                    " sites, lattice has " + std::to_string(sys.size()));
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i] > 0.0) || !std::isfinite(c[i])) {
            throw std::invalid_argument("weight at site " + to_string(sys.site(i)) + " must be positive");
        }
    }
}

STNState sample_stn_forward(const STNParams& p, const NeighborhoodSystem& sys, std::uint64_t seed) {
    Rng rng(seed);
    return sample_stn_forward(p, sys, rng);
}

STNState sample_stn_forward(const STNParams& p, const NeighborhoodSystem& sys, Rng& rng) {
    p.validate(sys);
    STNState st;
    st.omega = rng.normal(p.m0, p.c0);
    st.gamma.resize(sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i) st.gamma[i] = rng.normal(st.omega, p.c[i]);
    st.beta.resize(sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i) {
        double num = p.c0 * p.m0;
        double den = p.c0;
        for (const auto j : sys.forward_flat(i)) {
            num += p.c[j] * st.gamma[j];
            den += p.c[j];
        }
        st.beta[i] = rng.normal(num / den, den);
    }
    return st;
}

double stn_log_density(const STNParams& p, const NeighborhoodSystem& sys, const STNState& st) {
    p.validate(sys);
    if (st.beta.size() != sys.size() || st.gamma.size() != sys.size()) {
        throw std::invalid_argument("state dimensions do not match the lattice");
    }
    double total = normal_log_density(st.omega, p.m0, p.c0);
    for (std::size_t i = 0; i < sys.size(); ++i) {
        total += normal_log_density(st.gamma[i], st.omega, p.c[i]);
        double num = p.c0 * p.m0;
        double den = p.c0;
        for (const auto j : sys.forward_flat(i)) {
            num += p.c[j] * st.gamma[j];
            den += p.c[j];
        }
        total += normal_log_density(st.beta[i], num / den, den);
    }
    if (!std::isfinite(total)) throw std::domain_error("log density is not finite");
    return total;
}

double prop1_correlation(const STNParams& p, const NeighborhoodSystem& sys, const SiteIndex& a,
                         const SiteIndex& b) {
    if (a == b) throw std::invalid_argument("closed-form correlation requires two distinct sites");
    const auto s = weight_sums(p, sys, a, b);
    return (s.shared * (p.c0 + s.shared) + s.a * s.b) / ((p.c0 + s.a) * (p.c0 + s.b));
}

double prop1_correlation_rederived(const STNParams& p, const NeighborhoodSystem& sys,
                                   const SiteIndex& a, const SiteIndex& b) {
    if (a == b) return 1.0;
    const auto s = weight_sums(p, sys, a, b);
    return (p.c0 * s.shared + s.a * s.b) / ((p.c0 + s.a) * (p.c0 + s.b));
}

double mc_correlation(const STNParams& p, const NeighborhoodSystem& sys, const SiteIndex& a,
                      const SiteIndex& b, std::int64_t reps, std::uint64_t seed) {
    check_reps(reps);
    p.validate(sys);
    if (a == b) return 1.0;
    const auto fa = sys.forward_flat(sys.flat(a));
    const auto fb = sys.forward_flat(sys.flat(b));
    std::vector<std::size_t> used;
    std::set_union(fa.begin(), fa.end(), fb.begin(), fb.end(), std::back_inserter(used));

    // Positions of each forward set inside `used`.
    auto positions = [&](std::span<const std::size_t> set) {
        std::vector<std::size_t> pos;
        for (const auto j : set) {
            pos.push_back(static_cast<std::size_t>(std::lower_bound(used.begin(), used.end(), j) - used.begin()));
        }
        return pos;
    };
    const auto pa = positions(fa);
    const auto pb = positions(fb);
    double den_a = p.c0;
    double den_b = p.c0;
    for (const auto j : fa) den_a += p.c[j];
    for (const auto j : fb) den_b += p.c[j];

    Rng rng(seed);
    PairMoments moments;
    std::vector<double> weighted(used.size());
    for (std::int64_t r = 0; r < reps; ++r) {
        const double omega = rng.normal(p.m0, p.c0);
        for (std::size_t u = 0; u < used.size(); ++u) {
            weighted[u] = p.c[used[u]] * rng.normal(omega, p.c[used[u]]);
        }
        double num_a = p.c0 * p.m0;
        for (const auto u : pa) num_a += weighted[u];
        double num_b = p.c0 * p.m0;
        for (const auto u : pb) num_b += weighted[u];
        const double beta_a = rng.normal(num_a / den_a, den_a);
        const double beta_b = rng.normal(num_b / den_b, den_b);
        moments.add(beta_a, beta_b);
    }
    return moments.correlation();
}

SitePair::SitePair(SiteIndex a, SiteIndex b) : first(std::min(a, b)), second(std::max(a, b)) {
    if (a == b) throw std::invalid_argument("a link needs two distinct sites, got " + to_string(a) + " twice");
}

void STN2Params::validate() const {
    if (n < 1 || T < 1) throw std::invalid_argument("lattice dimensions must be positive");
    if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
    for (const auto& [pair, weight] : clink) {
        for (const auto& s : {pair.first, pair.second}) {
            if (s.unit < 1 || s.unit > n || s.time < 1 || s.time > T) {
                throw std::invalid_argument("link endpoint " + to_string(s) + " outside the lattice");
            }
        }
        if (!(weight > 0.0) || !std::isfinite(weight)) {
            throw std::invalid_argument("link weights must be positive");
        }
    }
}

double STN2Params::incident_weight(const SiteIndex& s) const {
    double total = 0.0;
    for (const auto& [pair, weight] : clink) {
        if (pair.touches(s)) total += weight;
    }
    return total;
}

STN2State sample_stn2_forward(const STN2Params& p, std::uint64_t seed) {
    Rng rng(seed);
    return sample_stn2_forward(p, rng);
}

STN2State sample_stn2_forward(const STN2Params& p, Rng& rng) {
    p.validate();
    const std::size_t sites = static_cast<std::size_t>(p.n) * p.T;
    auto flat = [&](const SiteIndex& s) {
        return static_cast<std::size_t>(s.unit - 1) * p.T + static_cast<std::size_t>(s.time - 1);
    };

    STN2State st;
    st.omega = rng.normal(p.m0, p.c0);
    std::vector<double> num(sites, p.c0 * p.m0);
    std::vector<double> den(sites, p.c0);
    for (const auto& [pair, weight] : p.clink) {
        const double g = rng.normal(st.omega, weight);
        st.gammalink.emplace(pair, g);
        for (const auto& s : {pair.first, pair.second}) {
            num[flat(s)] += weight * g;
            den[flat(s)] += weight;
        }
    }
    st.beta.resize(sites);
    for (std::size_t i = 0; i < sites; ++i) {
        if (den[i] == p.c0) ++st.isolated_sites;
        st.beta[i] = rng.normal(num[i] / den[i], den[i]);
    }
    return st;
}

double prop2_correlation(const STN2Params& p, const SiteIndex& a, const SiteIndex& b) {
    p.validate();
    const auto it = p.clink.find(SitePair(a, b));
    if (it == p.clink.end()) {
        throw std::invalid_argument("sites " + to_string(a) + " and " + to_string(b) + " are not linked");
    }
    const double link = it->second;
    const double sa = p.incident_weight(a);
    const double sb = p.incident_weight(b);
    return (link * (p.c0 + link) + sa * sb) / ((p.c0 + sa) * (p.c0 + sb));
}

double prop2_correlation_rederived(const STN2Params& p, const SiteIndex& a, const SiteIndex& b) {
    p.validate();
    const auto it = p.clink.find(SitePair(a, b));
    if (it == p.clink.end()) {
        throw std::invalid_argument("sites " + to_string(a) + " and " + to_string(b) + " are not linked");
    }
    const double link = it->second;
    const double sa = p.incident_weight(a);
    const double sb = p.incident_weight(b);
    return (p.c0 * link + sa * sb) / ((p.c0 + sa) * (p.c0 + sb));
}

double mc_correlation_stn2(const STN2Params& p, const SiteIndex& a, const SiteIndex& b,
                           std::int64_t reps, std::uint64_t seed) {
    check_reps(reps);
    p.validate();
    if (a == b) return 1.0;

    struct Incident {
        double weight;
        bool to_a;
        bool to_b;
    };
    std::vector<Incident> links;
    for (const auto& [pair, weight] : p.clink) {
        const bool ta = pair.touches(a);
        const bool tb = pair.touches(b);
        if (ta || tb) links.push_back({weight, ta, tb});
    }
    const double den_a = p.c0 + p.incident_weight(a);
    const double den_b = p.c0 + p.incident_weight(b);

    Rng rng(seed);
    PairMoments moments;
    for (std::int64_t r = 0; r < reps; ++r) {
        const double omega = rng.normal(p.m0, p.c0);
        double num_a = p.c0 * p.m0;
        double num_b = p.c0 * p.m0;
        for (const auto& link : links) {
            const double g = link.weight * rng.normal(omega, link.weight);
            if (link.to_a) num_a += g;
            if (link.to_b) num_b += g;
        }
        const double beta_a = rng.normal(num_a / den_a, den_a);
        const double beta_b = rng.normal(num_b / den_b, den_b);
        moments.add(beta_a, beta_b);
    }
    return moments.correlation();
}

}  // namespace stvc
