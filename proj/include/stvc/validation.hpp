#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stvc/graph.hpp"
#include "stvc/stn.hpp"

namespace stvc {

/// Rook adjacency on a rows x cols grid, units numbered row-major from 1.
AdjacencySpec grid_adjacency(int rows, int cols);
/// Path 1 - 2 - ... - n.
AdjacencySpec path_adjacency(int n);

struct MomentCheck {
    double worst_mean_error = 0.0;
    double worst_variance_error = 0.0;
    bool passed = false;
};

/// Empirical mean and variance of every beta over `reps` forward draws,
/// compared against m0 and 1 / c0.
MomentCheck check_stn_marginals(const STNParams& p, const NeighborhoodSystem& sys, std::int64_t reps,
                                std::uint64_t seed, double mean_tol, double var_tol);
MomentCheck check_stn2_marginals(const STN2Params& p, std::int64_t reps, std::uint64_t seed, double mean_tol,
                                 double var_tol);

/// Outcome of comparing a Monte Carlo correlation with two closed forms.
struct Arbitration {
    double monte_carlo = 0.0;
    double published = 0.0;
    double rederived = 0.0;
    double tolerance = 0.0;
    bool published_agrees = false;
    bool rederived_agrees = false;
    /// "published", "rederived", "both" or "neither".
    std::string verdict;
};

Arbitration arbitrate(double monte_carlo, double published, double rederived, double tolerance);

/// The fixed configurations used for arbitration, all with c0 = 1 and unit
/// weights: two path neighbors-of-a-shared-unit (overlap of one site) and a
/// single STN2 link.
Arbitration arbitrate_prop1_overlap(std::int64_t reps, std::uint64_t seed, double tolerance);
Arbitration arbitrate_prop2_single_link(std::int64_t reps, std::uint64_t seed, double tolerance);

/// Tolerance for Monte Carlo correlations: 0.005 at 10^6 replications,
/// widened as 1 / sqrt(reps) below that.
double correlation_tolerance(std::int64_t reps);

/// Largest gap, per conditional, between the change in log_joint and the
/// change in the conditional log density over random states and moves.
struct ConsistencyCheck {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double omega = 0.0;
    double tau = 0.0;
    int states = 0;

    double worst() const;
};

ConsistencyCheck check_conditional_consistency(NeighborhoodKind kind, int n, int T, int p, int states,
                                               std::uint64_t seed);

struct CheckResult {
    std::string name;
    bool passed = false;
    nlohmann::json detail;
};

struct ValidationOptions {
    std::int64_t reps = 1'000'000;
    std::uint64_t seed = 20190101;
};

struct ValidationReport {
    ValidationOptions options;
    std::vector<CheckResult> checks;

    bool all_passed() const;
    nlohmann::json to_json() const;
};

/// Marginal moments, correlation oracle against both closed forms,
/// conditional-joint consistency and neighborhood invariants.
ValidationReport run_validation(const ValidationOptions& opts);

}  // namespace stvc
