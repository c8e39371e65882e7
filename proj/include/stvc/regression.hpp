#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stvc/graph.hpp"
#include "stvc/random.hpp"

namespace stvc {

/// Complete n x T panel with p covariates. Sites use the flat index of
/// NeighborhoodSystem; covariate k (0-based) of site s is x[s * p + k].
struct PanelData {
    int n = 0;
    int T = 0;
    int p = 0;
    std::vector<double> y;
    std::vector<double> x;
    /// Original labels of the dense unit/time indices (may be empty).
    std::vector<std::string> unit_labels;
    std::vector<std::string> time_labels;

    std::size_t sites() const { return static_cast<std::size_t>(n) * T; }
    std::size_t flat(const SiteIndex& s) const {
        return static_cast<std::size_t>(s.unit - 1) * T + static_cast<std::size_t>(s.time - 1);
    }
    double covariate(std::size_t site, int k) const { return x[site * p + k]; }

    void validate() const;
};

struct Hyperparams {
    double m_alpha = 0.0;
    double c_alpha = 0.01;
    double m0 = 0.0;
    double c0 = 0.01;
    /// Site weights c_{i,t} by flat site; a single entry is broadcast.
    std::vector<double> c{50.0};
    double a0 = 0.01;
    double b0 = 0.01;

    double weight(std::size_t site) const { return c.size() == 1 ? c.front() : c[site]; }
    void validate(std::size_t sites) const;
};

/// Full sampler state. beta and gamma are indexed [site * p + k].
struct GibbsState {
    double alpha = 0.0;
    std::vector<double> beta;
    std::vector<double> gamma;
    std::vector<double> omega;
    std::vector<double> tau;
    /// D_{j,s} = c0 + sum of the weights over the forward set of (j,s).
    std::vector<double> D;
};

struct NormalConditional {
    double mean;
    double precision;
};

struct GammaConditional {
    double shape;
    double rate;
};

std::vector<double> normalizers(const Hyperparams& hyper, const NeighborhoodSystem& sys);

/// Initial state: alpha = m_alpha, beta = gamma = omega = m0, tau = a0 / b0.
GibbsState initial_state(const PanelData& data, const Hyperparams& hyper, const NeighborhoodSystem& sys);

/// alpha + sum_k beta_{i,t,k} x_{i,t,k}.
double linear_predictor(const GibbsState& state, const PanelData& data, const SiteIndex& site);

NormalConditional alpha_conditional(const GibbsState& state, const PanelData& data, const Hyperparams& hyper);
NormalConditional beta_conditional(const GibbsState& state, const PanelData& data, const Hyperparams& hyper,
                                   const NeighborhoodSystem& sys, const SiteIndex& site, int k);
NormalConditional gamma_conditional(const GibbsState& state, const Hyperparams& hyper,
                                    const NeighborhoodSystem& sys, const SiteIndex& site, int k);
NormalConditional omega_conditional(const GibbsState& state, const Hyperparams& hyper, int k);
/// Shape and rate of the precision of unit i (1-based).
GammaConditional tau_conditional(const GibbsState& state, const PanelData& data, const Hyperparams& hyper,
                                 int unit);

/// Log likelihood plus the log priors of alpha, tau and the STN hierarchy
/// of every covariate.
double log_joint(const GibbsState& state, const PanelData& data, const Hyperparams& hyper,
                 const NeighborhoodSystem& sys);

enum class ModelTag { STVC, Model0, Model00 };

std::string to_string(ModelTag tag);
ModelTag parse_model_tag(std::string_view name);

enum class RngMode {
    /// One stream consumed in sweep order.
    sequential,
    /// alpha and omega on a global stream; beta, gamma and tau of unit i on a
    /// stream keyed by unit_keys[i].
    per_unit,
};

struct ChainConfig {
    std::int64_t iterations = 22500;
    std::int64_t burn_in = 10000;
    std::int64_t thin = 25;
    std::uint64_t seed = 1;
    bool keep_gamma = false;
    RngMode rng_mode = RngMode::sequential;
    /// Stream keys for per_unit mode; defaults to 1..n when empty.
    std::vector<std::uint64_t> unit_keys;

    std::int64_t retained() const { return (iterations - burn_in) / thin; }
    void validate() const;
};

/// One retained sweep. Layouts depend on the model:
///   STVC    beta/gamma [site * p + k], omega [k], tau [unit]
///   Model0  beta [unit * p + k], tau [unit]
///   Model00 beta [k], tau [0]
struct Draw {
    std::int64_t iteration = 0;
    double alpha = 0.0;
    std::vector<double> beta;
    std::vector<double> gamma;
    std::vector<double> omega;
    std::vector<double> tau;

    friend bool operator==(const Draw&, const Draw&) = default;
};

struct Chain {
    ChainConfig config;
    ModelTag model_tag = ModelTag::STVC;
    int n = 0;
    int T = 0;
    int p = 0;
    std::vector<Draw> samples;

    /// Mean of y at `site` (flat index) under draw `r`.
    double predictor(std::size_t r, const PanelData& data, std::size_t site) const;
    /// Observation precision at `site` under draw `r`.
    double precision(std::size_t r, std::size_t site) const;
};

/// Raised when a sweep produces a non-finite value; carries a dump of the
/// offending state.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::string dump)
        : std::runtime_error(what), dump_(std::move(dump)) {}
    const std::string& dump() const { return dump_; }

private:
    std::string dump_;
};

/// Gibbs sampler for the varying-coefficient model. Each sweep updates
/// alpha, every beta (site-major, covariate-inner), every gamma in the same
/// order, every omega_k, then every tau_i.
Chain run_chain(const PanelData& data, const Hyperparams& hyper, const NeighborhoodSystem& sys,
                const ChainConfig& cfg);

/// Static-coefficient reference fits. Model0 has one coefficient vector and
/// precision per unit; Model00 a single coefficient vector and precision.
/// alpha and every coefficient get N(m_alpha, c_alpha) priors, precisions
/// Ga(a0, b0).
Chain fit_reference(const PanelData& data, const Hyperparams& hyper, ModelTag variant, const ChainConfig& cfg);

}  // namespace stvc
