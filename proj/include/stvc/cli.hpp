#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stvc/evaluation.hpp"
#include "stvc/io.hpp"

namespace stvc {

/// Synthetic panel plus the parameters that generated it.
struct SimulatedData {
    PanelData panel;
    double alpha = 0.0;
    std::vector<double> tau;
    /// Indexed [site * p + k].
    std::vector<double> beta;
};

/// Covariates come from `sim.covariates_from` or are drawn N(0, 1); beta is
/// drawn per covariate from the STN prior of `cfg` (or held constant);
/// y = alpha + beta'x + noise with precision tau_i.
SimulatedData simulate_dataset(const RunConfig& cfg, std::uint64_t seed);
nlohmann::json truth_to_json(const SimulatedData& sim, const RunConfig& cfg, std::uint64_t seed);

struct FitOutcome {
    Chain chain;
    FitReport report;
};

/// Runs the configured model on `data` and evaluates CPO, LPML and summaries.
FitOutcome fit_model(const RunConfig& cfg, const PanelData& data);

/// Entry point of the `stvc` command line tool. Returns the process exit
/// status.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stvc
