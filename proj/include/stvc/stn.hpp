#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "stvc/graph.hpp"
#include "stvc/random.hpp"

namespace stvc {

// Every normal in this module is parameterized by (mean, precision).

/// Hyperparameters of the spatio-temporal normal process.
struct STNParams {
    double m0 = 0.0;
    double c0 = 1.0;
    /// Site weights c_{i,t}, indexed by flat site.
    std::vector<double> c;

    static STNParams constant(const NeighborhoodSystem& sys, double m0, double c0, double weight);

    /// Throws std::invalid_argument unless c0 > 0 and every weight is a
    /// positive value defined for each site of `sys`.
    void validate(const NeighborhoodSystem& sys) const;
};

/// One realization of the process; beta and gamma are indexed by flat site.
struct STNState {
    std::vector<double> beta;
    std::vector<double> gamma;
    double omega = 0.0;
};

/// Draws omega, then every gamma, then every beta, in flat-site order.
STNState sample_stn_forward(const STNParams& p, const NeighborhoodSystem& sys, std::uint64_t seed);
STNState sample_stn_forward(const STNParams& p, const NeighborhoodSystem& sys, Rng& rng);

/// Joint log density of (beta, gamma, omega) under the three-level hierarchy.
double stn_log_density(const STNParams& p, const NeighborhoodSystem& sys, const STNState& st);

/// Closed-form correlation as published:
/// [S_ab (c0 + S_ab) + S_a S_b] / [(c0 + S_a)(c0 + S_b)], where S_x sums the
/// weights over the forward set of x and S_ab over the intersection.
/// Rejects a == b, where the expression does not reduce to 1.
double prop1_correlation(const STNParams& p, const NeighborhoodSystem& sys, const SiteIndex& a,
                         const SiteIndex& b);

/// Correlation obtained from the covariance of the hierarchy,
/// Cov(beta_a, beta_b) = (S_ab + S_a S_b / c0) / [(c0 + S_a)(c0 + S_b)],
/// giving [c0 S_ab + S_a S_b] / [(c0 + S_a)(c0 + S_b)] for a != b (the
/// betas are conditionally independent given gamma only then). Returns 1 at
/// a == b. Agrees with prop1_correlation whenever the intersection is empty.
double prop1_correlation_rederived(const STNParams& p, const NeighborhoodSystem& sys,
                                   const SiteIndex& a, const SiteIndex& b);

/// Empirical Pearson correlation of (beta_a, beta_b) over `reps` forward
/// simulations. Only omega, the gammas in the union of the two forward sets
/// and the two betas are drawn; the remaining sites do not enter the pair's
/// joint law. Requires reps >= 10^4; returns exactly 1 when a == b.
double mc_correlation(const STNParams& p, const NeighborhoodSystem& sys, const SiteIndex& a,
                      const SiteIndex& b, std::int64_t reps, std::uint64_t seed);

/// Unordered pair of sites, stored with first < second.
struct SitePair {
    SiteIndex first;
    SiteIndex second;

    SitePair(SiteIndex a, SiteIndex b);
    bool touches(const SiteIndex& s) const { return first == s || second == s; }
    const SiteIndex& other(const SiteIndex& s) const { return first == s ? second : first; }

    friend auto operator<=>(const SitePair&, const SitePair&) = default;
};

/// Hyperparameters of the link-based construction: one latent variable per
/// connection between two sites.
struct STN2Params {
    int n = 1;
    int T = 1;
    double m0 = 0.0;
    double c0 = 1.0;
    std::map<SitePair, double> clink;

    void validate() const;
    /// Sum of the weights of the links incident to s.
    double incident_weight(const SiteIndex& s) const;
};

struct STN2State {
    /// Indexed by flat site (unit - 1) * T + (time - 1).
    std::vector<double> beta;
    std::map<SitePair, double> gammalink;
    double omega = 0.0;
    /// Sites without links; their beta is drawn from N(m0, c0).
    int isolated_sites = 0;
};

STN2State sample_stn2_forward(const STN2Params& p, std::uint64_t seed);
STN2State sample_stn2_forward(const STN2Params& p, Rng& rng);

/// Published linked-pair correlation:
/// [c_ab (c0 + c_ab) + S_a S_b] / [(c0 + S_a)(c0 + S_b)].
double prop2_correlation(const STN2Params& p, const SiteIndex& a, const SiteIndex& b);

/// Covariance-derived counterpart: [c0 c_ab + S_a S_b] / [(c0 + S_a)(c0 + S_b)].
double prop2_correlation_rederived(const STN2Params& p, const SiteIndex& a, const SiteIndex& b);

/// Monte Carlo oracle for the link-based construction, drawing omega, the
/// links incident to a or b, and the two betas.
double mc_correlation_stn2(const STN2Params& p, const SiteIndex& a, const SiteIndex& b,
                           std::int64_t reps, std::uint64_t seed);

}  // namespace stvc
