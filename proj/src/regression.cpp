#include "stvc/regression.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace stvc {

void PanelData::validate() const {
    if (n < 1 || T < 1 || p < 1) throw std::invalid_argument("panel needs n, T, p >= 1");
    if (y.size() != sites()) throw std::invalid_argument("response size does not match n * T");
    if (x.size() != sites() * p) throw std::invalid_argument("covariate size does not match n * T * p");
    for (const double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite response value");
    }
    for (const double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite covariate value");
    }
}

void Hyperparams::validate(std::size_t sites) const {
    if (!(c_alpha > 0.0)) throw std::invalid_argument("c_alpha must be positive");
    if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw std::invalid_argument("a0 and b0 must be positive");
    if (c.size() != 1 && c.size() != sites) {
        throw std::invalid_argument("site weights must be a scalar or one value per site");
    }
    for (const double w : c) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("site weights must be positive");
    }
}

void ChainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) throw std::invalid_argument("burn_in must lie in [0, iterations)");
    if (thin < 1) throw std::invalid_argument("thin must be at least 1");
}

std::string to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::STVC: return "STVC";
        case ModelTag::Model0: return "Model0";
        case ModelTag::Model00: return "Model00";
    }
    return "?";
}

ModelTag parse_model_tag(std::string_view name) {
    if (name == "STVC" || name == "stvc") return ModelTag::STVC;
    if (name == "Model0" || name == "model0") return ModelTag::Model0;
    if (name == "Model00" || name == "model00") return ModelTag::Model00;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

double Chain::predictor(std::size_t r, const PanelData& data, std::size_t site) const {
    const Draw& d = samples[r];
    const std::size_t unit = site / T;
    double eta = d.alpha;
    for (int k = 0; k < p; ++k) {
        double b = 0.0;
        switch (model_tag) {
            case ModelTag::STVC: b = d.beta[site * p + k]; break;
            case ModelTag::Model0: b = d.beta[unit * p + k]; break;
            case ModelTag::Model00: b = d.beta[k]; break;
        }
        eta += b * data.covariate(site, k);
    }
    return eta;
}

double Chain::precision(std::size_t r, std::size_t site) const {
    const Draw& d = samples[r];
    return model_tag == ModelTag::Model00 ? d.tau.front() : d.tau[site / T];
}

std::vector<double> normalizers(const Hyperparams& hyper, const NeighborhoodSystem& sys) {
    std::vector<double> D(sys.size(), hyper.c0);
    for (std::size_t j = 0; j < sys.size(); ++j) {
        for (const auto l : sys.forward_flat(j)) D[j] += hyper.weight(l);
    }
    return D;
}

GibbsState initial_state(const PanelData& data, const Hyperparams& hyper, const NeighborhoodSystem& sys) {
    const std::size_t cells = data.sites() * data.p;
    GibbsState st;
    st.alpha = hyper.m_alpha;
    st.beta.assign(cells, hyper.m0);
    st.gamma.assign(cells, hyper.m0);
    st.omega.assign(data.p, hyper.m0);
    st.tau.assign(data.n, hyper.a0 / hyper.b0);
    st.D = normalizers(hyper, sys);
    return st;
}

namespace {

void check_dims(const GibbsState& st, const PanelData& data) {
    const std::size_t cells = data.sites() * data.p;
    if (st.beta.size() != cells || st.tau.size() != static_cast<std::size_t>(data.n)) {
        throw std::invalid_argument("state dimensions do not match the panel");
    }
}

double covariate_fit(const GibbsState& st, const PanelData& data, std::size_t site) {
    double fit = 0.0;
    for (int k = 0; k < data.p; ++k) fit += st.beta[site * data.p + k] * data.covariate(site, k);
    return fit;
}

}  // namespace

double linear_predictor(const GibbsState& state, const PanelData& data, const SiteIndex& site) {
    return state.alpha + covariate_fit(state, data, data.flat(site));
}

NormalConditional alpha_conditional(const GibbsState& state, const PanelData& data, const Hyperparams& hyper) {
    check_dims(state, data);
    double num = hyper.c_alpha * hyper.m_alpha;
    double prec = hyper.c_alpha;
    for (std::size_t s = 0; s < data.sites(); ++s) {
        const double tau = state.tau[s / data.T];
        num += tau * (data.y[s] - covariate_fit(state, data, s));
        prec += tau;
    }
    return {num / prec, prec};
}

NormalConditional beta_conditional(const GibbsState& state, const PanelData& data, const Hyperparams& hyper,
                                   const NeighborhoodSystem& sys, const SiteIndex& site, int k) {
    check_dims(state, data);
    if (k < 0 || k >= data.p) throw std::out_of_range("covariate index out of range");
    const std::size_t s = sys.flat(site);
    const int p = data.p;
    double num = hyper.c0 * hyper.m0;
    double prec = hyper.c0;
    for (const auto j : sys.forward_flat(s)) {
        num += hyper.weight(j) * state.gamma[j * p + k];
        prec += hyper.weight(j);
    }
    const double tau = state.tau[site.unit - 1];
    const double xk = data.covariate(s, k);
    double partial = data.y[s] - state.alpha;
    for (int l = 0; l < p; ++l) {
        if (l != k) partial -= state.beta[s * p + l] * data.covariate(s, l);
    }
    num += tau * xk * partial;
    prec += tau * xk * xk;
    return {num / prec, prec};
}

NormalConditional gamma_conditional(const GibbsState& state, const Hyperparams& hyper,
                                    const NeighborhoodSystem& sys, const SiteIndex& site, int k) {
    const std::size_t i = sys.flat(site);
    const std::size_t p = state.omega.size();
    if (k < 0 || static_cast<std::size_t>(k) >= p) throw std::out_of_range("covariate index out of range");
    const double ci = hyper.weight(i);
    double num = state.omega[k];
    double inv_d = 0.0;
    for (const auto j : sys.reversed_flat(i)) {
        double others = hyper.c0 * hyper.m0;
        for (const auto l : sys.forward_flat(j)) {
            if (l != i) others += hyper.weight(l) * state.gamma[l * p + k];
        }
        num += state.beta[j * p + k] - others / state.D[j];
        inv_d += 1.0 / state.D[j];
    }
    const double scale = 1.0 + ci * inv_d;
    return {num / scale, ci * scale};
}

NormalConditional omega_conditional(const GibbsState& state, const Hyperparams& hyper, int k) {
    const std::size_t p = state.omega.size();
    if (k < 0 || static_cast<std::size_t>(k) >= p) throw std::out_of_range("covariate index out of range");
    const std::size_t sites = state.gamma.size() / p;
    double num = hyper.c0 * hyper.m0;
    double prec = hyper.c0;
    for (std::size_t s = 0; s < sites; ++s) {
        num += hyper.weight(s) * state.gamma[s * p + k];
        prec += hyper.weight(s);
    }
    return {num / prec, prec};
}

GammaConditional tau_conditional(const GibbsState& state, const PanelData& data, const Hyperparams& hyper,
                                 int unit) {
    check_dims(state, data);
    if (unit < 1 || unit > data.n) throw std::out_of_range("unit out of range");
    double sq = 0.0;
    for (int t = 1; t <= data.T; ++t) {
        const double r = data.y[data.flat({unit, t})] - linear_predictor(state, data, {unit, t});
        sq += r * r;
    }
    return {hyper.a0 + 0.5 * data.T, hyper.b0 + 0.5 * sq};
}

double log_joint(const GibbsState& state, const PanelData& data, const Hyperparams& hyper,
                 const NeighborhoodSystem& sys) {
    check_dims(state, data);
    const int p = data.p;
    double total = normal_log_density(state.alpha, hyper.m_alpha, hyper.c_alpha);
    for (int i = 0; i < data.n; ++i) total += gamma_log_density(state.tau[i], hyper.a0, hyper.b0);
    for (std::size_t s = 0; s < data.sites(); ++s) {
        const double eta = state.alpha + covariate_fit(state, data, s);
        total += normal_log_density(data.y[s], eta, state.tau[s / data.T]);
    }
    for (int k = 0; k < p; ++k) {
        total += normal_log_density(state.omega[k], hyper.m0, hyper.c0);
        for (std::size_t s = 0; s < data.sites(); ++s) {
            total += normal_log_density(state.gamma[s * p + k], state.omega[k], hyper.weight(s));
            double num = hyper.c0 * hyper.m0;
            double den = hyper.c0;
            for (const auto j : sys.forward_flat(s)) {
                num += hyper.weight(j) * state.gamma[j * p + k];
                den += hyper.weight(j);
            }
            total += normal_log_density(state.beta[s * p + k], num / den, den);
        }
    }
    if (!std::isfinite(total)) throw std::domain_error("log joint density is not finite");
    return total;
}

namespace {

/// Global stream plus optional per-unit streams.
class StreamSet {
public:
    StreamSet(const ChainConfig& cfg, int n) : global_(cfg.seed) {
        if (cfg.rng_mode != RngMode::per_unit) return;
        if (!cfg.unit_keys.empty() && cfg.unit_keys.size() != static_cast<std::size_t>(n)) {
            throw std::invalid_argument("unit_keys must hold one key per unit");
        }
        for (int i = 0; i < n; ++i) {
            const std::uint64_t key = cfg.unit_keys.empty() ? static_cast<std::uint64_t>(i + 1) : cfg.unit_keys[i];
            units_.push_back(std::make_unique<Rng>(cfg.seed, key));
        }
    }
    Rng& global() { return global_; }
    Rng& unit(std::size_t i) { return units_.empty() ? global_ : *units_[i]; }

private:
    Rng global_;
    std::vector<std::unique_ptr<Rng>> units_;
};

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string describe(std::string_view name, const std::vector<double>& v) {
    std::ostringstream out;
    out.precision(17);
    out << name << " [" << v.size() << "]:";
    for (const double x : v) out << ' ' << x;
    out << '\n';
    return out.str();
}

void check_sweep(std::int64_t iter, double alpha, const std::vector<double>& beta, const std::vector<double>& gamma,
                 const std::vector<double>& omega, const std::vector<double>& tau) {
    if (std::isfinite(alpha) && all_finite(beta) && all_finite(gamma) && all_finite(omega) && all_finite(tau)) {
        return;
    }
    std::ostringstream dump;
    dump.precision(17);
    dump << "iteration " << iter << "\nalpha: " << alpha << '\n'
         << describe("beta", beta) << describe("gamma", gamma) << describe("omega", omega) << describe("tau", tau);
    throw NumericalError("non-finite value in Gibbs sweep " + std::to_string(iter), dump.str());
}

bool retain(const ChainConfig& cfg, std::int64_t iter) {
    return iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0;
}

}  // namespace

Chain run_chain(const PanelData& data, const Hyperparams& hyper, const NeighborhoodSystem& sys,
                const ChainConfig& cfg) {
    data.validate();
    hyper.validate(data.sites());
    cfg.validate();
    if (sys.units() != data.n || sys.times() != data.T) {
        throw std::invalid_argument("neighborhood lattice does not match the panel dimensions");
    }

    const int p = data.p;
    const std::size_t sites = data.sites();
    GibbsState st = initial_state(data, hyper, sys);
    StreamSet rng(cfg, data.n);

    // Weighted gamma sums over each forward set, c0 * m0 included.
    std::vector<double> G(sites * p);
    auto refresh_sums = [&] {
        for (std::size_t j = 0; j < sites; ++j) {
            for (int k = 0; k < p; ++k) {
                double g = hyper.c0 * hyper.m0;
                for (const auto l : sys.forward_flat(j)) g += hyper.weight(l) * st.gamma[l * p + k];
                G[j * p + k] = g;
            }
        }
    };
    std::vector<double> inv_d_sum(sites, 0.0);
    for (std::size_t i = 0; i < sites; ++i) {
        for (const auto j : sys.reversed_flat(i)) inv_d_sum[i] += 1.0 / st.D[j];
    }
    double weight_total = hyper.c0;
    for (std::size_t s = 0; s < sites; ++s) weight_total += hyper.weight(s);

    Chain chain;
    chain.config = cfg;
    chain.model_tag = ModelTag::STVC;
    chain.n = data.n;
    chain.T = data.T;
    chain.p = p;
    chain.samples.reserve(static_cast<std::size_t>(cfg.retained()));

    for (std::int64_t iter = 1; iter <= cfg.iterations; ++iter) {
        {
            const auto cond = alpha_conditional(st, data, hyper);
            st.alpha = rng.global().normal(cond.mean, cond.precision);
        }

        refresh_sums();
        for (std::size_t s = 0; s < sites; ++s) {
            const double tau = st.tau[s / data.T];
            Rng& r = rng.unit(s / data.T);
            for (int k = 0; k < p; ++k) {
                const double xk = data.covariate(s, k);
                double partial = data.y[s] - st.alpha;
                for (int l = 0; l < p; ++l) {
                    if (l != k) partial -= st.beta[s * p + l] * data.covariate(s, l);
                }
                const double prec = st.D[s] + tau * xk * xk;
                const double mean = (G[s * p + k] + tau * xk * partial) / prec;
                st.beta[s * p + k] = r.normal(mean, prec);
            }
        }

        for (std::size_t i = 0; i < sites; ++i) {
            const double ci = hyper.weight(i);
            const double scale = 1.0 + ci * inv_d_sum[i];
            Rng& r = rng.unit(i / data.T);
            for (int k = 0; k < p; ++k) {
                const double old = st.gamma[i * p + k];
                double num = st.omega[k];
                for (const auto j : sys.reversed_flat(i)) {
                    num += st.beta[j * p + k] - (G[j * p + k] - ci * old) / st.D[j];
                }
                const double fresh = r.normal(num / scale, ci * scale);
                st.gamma[i * p + k] = fresh;
                for (const auto j : sys.reversed_flat(i)) G[j * p + k] += ci * (fresh - old);
            }
        }

        for (int k = 0; k < p; ++k) {
            double num = hyper.c0 * hyper.m0;
            for (std::size_t s = 0; s < sites; ++s) num += hyper.weight(s) * st.gamma[s * p + k];
            st.omega[k] = rng.global().normal(num / weight_total, weight_total);
        }

        for (int i = 1; i <= data.n; ++i) {
            const auto cond = tau_conditional(st, data, hyper, i);
            st.tau[i - 1] = rng.unit(i - 1).gamma(cond.shape, cond.rate);
        }

        check_sweep(iter, st.alpha, st.beta, st.gamma, st.omega, st.tau);
        if (retain(cfg, iter)) {
            Draw d;
            d.iteration = iter;
            d.alpha = st.alpha;
            d.beta = st.beta;
            if (cfg.keep_gamma) d.gamma = st.gamma;
            d.omega = st.omega;
            d.tau = st.tau;
            chain.samples.push_back(std::move(d));
        }
    }
    return chain;
}

Chain fit_reference(const PanelData& data, const Hyperparams& hyper, ModelTag variant, const ChainConfig& cfg) {
    data.validate();
    hyper.validate(data.sites());
    cfg.validate();
    if (variant == ModelTag::STVC) throw std::invalid_argument("fit_reference expects Model0 or Model00");

    const int p = data.p;
    const int n = data.n;
    const int T = data.T;
    const bool per_unit = variant == ModelTag::Model0;
    const std::size_t groups = per_unit ? static_cast<std::size_t>(n) : 1;
    const double prior_mean = hyper.m_alpha;
    const double prior_prec = hyper.c_alpha;

    double alpha = hyper.m_alpha;
    std::vector<double> beta(groups * p, prior_mean);
    std::vector<double> tau(groups, hyper.a0 / hyper.b0);
    StreamSet rng(cfg, n);

    auto group_of = [&](std::size_t site) { return per_unit ? site / T : 0; };
    auto fit = [&](std::size_t site) {
        const std::size_t g = group_of(site);
        double f = 0.0;
        for (int k = 0; k < p; ++k) f += beta[g * p + k] * data.covariate(site, k);
        return f;
    };

    Chain chain;
    chain.config = cfg;
    chain.model_tag = variant;
    chain.n = n;
    chain.T = T;
    chain.p = p;
    chain.samples.reserve(static_cast<std::size_t>(cfg.retained()));

    const std::size_t sites = data.sites();
    const std::size_t sites_per_group = per_unit ? static_cast<std::size_t>(T) : sites;
    for (std::int64_t iter = 1; iter <= cfg.iterations; ++iter) {
        {
            double num = prior_prec * prior_mean;
            double prec = prior_prec;
            for (std::size_t s = 0; s < sites; ++s) {
                num += tau[group_of(s)] * (data.y[s] - fit(s));
                prec += tau[group_of(s)];
            }
            alpha = rng.global().normal(num / prec, prec);
        }

        for (std::size_t g = 0; g < groups; ++g) {
            Rng& r = per_unit ? rng.unit(g) : rng.global();
            const std::size_t first = g * sites_per_group;
            for (int k = 0; k < p; ++k) {
                double num = prior_prec * prior_mean;
                double prec = prior_prec;
                for (std::size_t s = first; s < first + sites_per_group; ++s) {
                    const double xk = data.covariate(s, k);
                    double partial = data.y[s] - alpha;
                    for (int l = 0; l < p; ++l) {
                        if (l != k) partial -= beta[g * p + l] * data.covariate(s, l);
                    }
                    num += tau[g] * xk * partial;
                    prec += tau[g] * xk * xk;
                }
                beta[g * p + k] = r.normal(num / prec, prec);
            }
        }

        for (std::size_t g = 0; g < groups; ++g) {
            Rng& r = per_unit ? rng.unit(g) : rng.global();
            const std::size_t first = g * sites_per_group;
            double sq = 0.0;
            for (std::size_t s = first; s < first + sites_per_group; ++s) {
                const double res = data.y[s] - alpha - fit(s);
                sq += res * res;
            }
            tau[g] = r.gamma(hyper.a0 + 0.5 * static_cast<double>(sites_per_group), hyper.b0 + 0.5 * sq);
        }

        check_sweep(iter, alpha, beta, {}, {}, tau);
        if (retain(cfg, iter)) {
            Draw d;
            d.iteration = iter;
            d.alpha = alpha;
            d.beta = beta;
            d.tau = tau;
            chain.samples.push_back(std::move(d));
        }
    }
    return chain;
}

}  // namespace stvc
