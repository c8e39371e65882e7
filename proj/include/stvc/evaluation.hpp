#pragma once

#include <string>
#include <vector>

#include "stvc/regression.hpp"

namespace stvc {

/// Conditional predictive ordinates by flat site. log_values is kept
/// alongside so tiny ordinates do not lose precision in the LPML sum.
struct CpoMatrix {
    std::vector<double> values;
    std::vector<double> log_values;
};

/// Harmonic-mean estimate of each CPO over the retained draws.
/// Throws std::domain_error naming the site if a draw has zero or
/// non-finite density.
CpoMatrix cpo(const Chain& chain, const PanelData& data);

/// Sum of log CPO over all sites.
double lpml(const CpoMatrix& cpo);

/// Posterior mean and equal-tailed credible bounds of one scalar parameter.
/// unit, time and k are 1-based; 0 marks an index the block does not use.
struct ParameterSummary {
    std::string block;
    int unit = 0;
    int time = 0;
    int k = 0;
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Linear-interpolation quantile of an already sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double prob);

/// Summaries for alpha, beta, omega, tau (and gamma when stored), with
/// bounds at probabilities (1 - level) / 2 and 1 - (1 - level) / 2.
std::vector<ParameterSummary> summarize(const Chain& chain, double level = 0.95);

struct NeighborhoodDescriptor {
    std::string kind;
    int q = 0;
    double c = 0.0;
    double median_size = 0.0;
};

struct FitReport {
    std::string dataset;
    double lpml = 0.0;
    CpoMatrix cpo;
    std::vector<ParameterSummary> summaries;
    ModelTag model_tag = ModelTag::STVC;
    NeighborhoodDescriptor neighborhood;
};

struct RankingRow {
    std::size_t input_position = 0;
    std::string dataset;
    std::string model_tag;
    NeighborhoodDescriptor neighborhood;
    double lpml = 0.0;
    /// Highest LPML among rows sharing dataset and neighborhood type.
    bool best_in_group = false;
};

/// Rows sorted by LPML, descending; ties keep input order.
std::vector<RankingRow> compare(const std::vector<FitReport>& reports);

}  // namespace stvc
