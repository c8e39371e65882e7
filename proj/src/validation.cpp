#include "stvc/validation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stvc/regression.hpp"

namespace stvc {

AdjacencySpec grid_adjacency(int rows, int cols) {
    AdjacencySpec adj;
    adj.n = rows * cols;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int id = r * cols + c + 1;
            if (c + 1 < cols) adj.edges.emplace_back(id, id + 1);
            if (r + 1 < rows) adj.edges.emplace_back(id, id + cols);
        }
    }
    std::sort(adj.edges.begin(), adj.edges.end());
    return adj;
}

AdjacencySpec path_adjacency(int n) {
    AdjacencySpec adj;
    adj.n = n;
    for (int i = 1; i < n; ++i) adj.edges.emplace_back(i, i + 1);
    return adj;
}

namespace {

struct RunningMoments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / (count - 1.0); }
};

MomentCheck finish(const std::vector<RunningMoments>& acc, double m0, double c0, double mean_tol, double var_tol) {
    MomentCheck out;
    for (const auto& m : acc) {
        out.worst_mean_error = std::max(out.worst_mean_error, std::abs(m.mean - m0));
        out.worst_variance_error = std::max(out.worst_variance_error, std::abs(m.variance() - 1.0 / c0));
    }
    out.passed = out.worst_mean_error <= mean_tol && out.worst_variance_error <= var_tol;
    return out;
}

}  // namespace

MomentCheck check_stn_marginals(const STNParams& p, const NeighborhoodSystem& sys, std::int64_t reps,
                                std::uint64_t seed, double mean_tol, double var_tol) {
    Rng rng(seed);
    std::vector<RunningMoments> acc(sys.size());
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto st = sample_stn_forward(p, sys, rng);
        for (std::size_t i = 0; i < sys.size(); ++i) acc[i].add(st.beta[i]);
    }
    return finish(acc, p.m0, p.c0, mean_tol, var_tol);
}

MomentCheck check_stn2_marginals(const STN2Params& p, std::int64_t reps, std::uint64_t seed, double mean_tol,
                                 double var_tol) {
    Rng rng(seed);
    std::vector<RunningMoments> acc(static_cast<std::size_t>(p.n) * p.T);
    for (std::int64_t r = 0; r < reps; ++r) {
        const auto st = sample_stn2_forward(p, rng);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i].add(st.beta[i]);
    }
    return finish(acc, p.m0, p.c0, mean_tol, var_tol);
}

double correlation_tolerance(std::int64_t reps) {
    return 0.005 * std::max(1.0, std::sqrt(1e6 / static_cast<double>(reps)));
}

Arbitration arbitrate(double monte_carlo, double published, double rederived, double tolerance) {
    Arbitration a{monte_carlo, published, rederived, tolerance, false, false, {}};
    a.published_agrees = std::abs(monte_carlo - published) <= tolerance;
    a.rederived_agrees = std::abs(monte_carlo - rederived) <= tolerance;
    if (a.published_agrees && a.rederived_agrees) {
        a.verdict = "both";
    } else if (a.published_agrees) {
        a.verdict = "published";
    } else if (a.rederived_agrees) {
        a.verdict = "rederived";
    } else {
        a.verdict = "neither";
    }
    return a;
}

Arbitration arbitrate_prop1_overlap(std::int64_t reps, std::uint64_t seed, double tolerance) {
    // Units 1 and 3 of the path 1 - 2 - 3 share unit 2: |d1| = |d3| = 2, |d1 n d3| = 1.
    const auto sys = build_neighborhoods(path_adjacency(3), 1, {NeighborhoodKind::spatial, 1});
    const auto p = STNParams::constant(sys, 0.0, 1.0, 1.0);
    const SiteIndex a{1, 1};
    const SiteIndex b{3, 1};
    return arbitrate(mc_correlation(p, sys, a, b, reps, seed), prop1_correlation(p, sys, a, b),
                     prop1_correlation_rederived(p, sys, a, b), tolerance);
}

Arbitration arbitrate_prop2_single_link(std::int64_t reps, std::uint64_t seed, double tolerance) {
    STN2Params p;
    p.n = 2;
    p.T = 1;
    p.m0 = 0.0;
    p.c0 = 1.0;
    const SiteIndex a{1, 1};
    const SiteIndex b{2, 1};
    p.clink.emplace(SitePair(a, b), 1.0);
    return arbitrate(mc_correlation_stn2(p, a, b, reps, seed), prop2_correlation(p, a, b),
                     prop2_correlation_rederived(p, a, b), tolerance);
}

double ConsistencyCheck::worst() const { return std::max({alpha, beta, gamma, omega, tau}); }

ConsistencyCheck check_conditional_consistency(NeighborhoodKind kind, int n, int T, int p, int states,
                                               std::uint64_t seed) {
    Rng rng(seed);
    AdjacencySpec adj = path_adjacency(n);
    const auto sys = build_neighborhoods(adj, T, {kind, 2});

    ConsistencyCheck out;
    out.states = states;
    for (int rep = 0; rep < states; ++rep) {
        PanelData data;
        data.n = n;
        data.T = T;
        data.p = p;
        for (std::size_t s = 0; s < data.sites(); ++s) data.y.push_back(rng.normal(0.0, 1.0));
        for (std::size_t s = 0; s < data.sites() * p; ++s) data.x.push_back(rng.normal(0.0, 1.0));

        Hyperparams hyper;
        hyper.m_alpha = rng.uniform(-1.0, 1.0);
        hyper.c_alpha = rng.uniform(0.1, 2.0);
        hyper.m0 = rng.uniform(-1.0, 1.0);
        hyper.c0 = rng.uniform(0.1, 2.0);
        hyper.c.clear();
        for (std::size_t s = 0; s < data.sites(); ++s) hyper.c.push_back(rng.uniform(0.2, 3.0));
        hyper.a0 = rng.uniform(0.5, 2.0);
        hyper.b0 = rng.uniform(0.5, 2.0);

        GibbsState st = initial_state(data, hyper, sys);
        st.alpha = rng.normal(0.0, 1.0);
        for (auto& v : st.beta) v = rng.normal(0.0, 1.0);
        for (auto& v : st.gamma) v = rng.normal(0.0, 1.0);
        for (auto& v : st.omega) v = rng.normal(0.0, 1.0);
        for (auto& v : st.tau) v = rng.uniform(0.5, 3.0);

        // Moves `slot` between two values and compares both log differences.
        auto gap = [&](double& slot, auto&& conditional_log_density, double v0, double v1) {
            const double saved = slot;
            slot = v0;
            const double j0 = log_joint(st, data, hyper, sys);
            const double c0 = conditional_log_density();
            slot = v1;
            const double j1 = log_joint(st, data, hyper, sys);
            const double c1 = conditional_log_density();
            slot = saved;
            return std::abs((j1 - j0) - (c1 - c0));
        };
        // The conditional does not depend on the slot it governs, so the
        // parameters can be evaluated at either value.
        auto normal_at = [&](double& slot, auto&& cond) {
            return [target = &slot, cond] {
                const auto c = cond();
                return normal_log_density(*target, c.mean, c.precision);
            };
        };

        // Moves are drawn before use so the stream order is fixed.
        auto moves = [&](double lo, double hi, bool positive) {
            if (positive) {
                const double v0 = rng.uniform(lo, hi);
                return std::pair{v0, rng.uniform(lo, hi)};
            }
            const double v0 = rng.normal(0.0, 1.0);
            return std::pair{v0, rng.normal(0.0, 1.0)};
        };
        {
            auto cond = [&] { return alpha_conditional(st, data, hyper); };
            const auto [v0, v1] = moves(0, 0, false);
            out.alpha = std::max(out.alpha, gap(st.alpha, normal_at(st.alpha, cond), v0, v1));
        }
        const auto site = sys.site(static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(data.sites()))) %
                                   data.sites());
        const int k = static_cast<int>(rng.uniform(0.0, static_cast<double>(p))) % p;
        const std::size_t cell = sys.flat(site) * p + k;
        {
            auto cond = [&] { return beta_conditional(st, data, hyper, sys, site, k); };
            const auto [v0, v1] = moves(0, 0, false);
            out.beta = std::max(out.beta, gap(st.beta[cell], normal_at(st.beta[cell], cond), v0, v1));
        }
        {
            auto cond = [&] { return gamma_conditional(st, hyper, sys, site, k); };
            const auto [v0, v1] = moves(0, 0, false);
            out.gamma = std::max(out.gamma, gap(st.gamma[cell], normal_at(st.gamma[cell], cond), v0, v1));
        }
        {
            auto cond = [&] { return omega_conditional(st, hyper, k); };
            const auto [v0, v1] = moves(0, 0, false);
            out.omega = std::max(out.omega, gap(st.omega[k], normal_at(st.omega[k], cond), v0, v1));
        }
        {
            const int unit = site.unit;
            auto density = [&] {
                const auto c = tau_conditional(st, data, hyper, unit);
                return gamma_log_density(st.tau[unit - 1], c.shape, c.rate);
            };
            const auto [v0, v1] = moves(0.2, 4.0, true);
            out.tau = std::max(out.tau, gap(st.tau[unit - 1], density, v0, v1));
        }
    }
    return out;
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json j;
    j["reps"] = options.reps;
    j["seed"] = options.seed;
    j["generator"] = std::string(Rng::kName);
    j["all_passed"] = all_passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return j;
}

namespace {

nlohmann::json to_json(const Arbitration& a) {
    return {{"monte_carlo", a.monte_carlo},
            {"published", a.published},
            {"rederived", a.rederived},
            {"tolerance", a.tolerance},
            {"published_agrees", a.published_agrees},
            {"rederived_agrees", a.rederived_agrees},
            {"verdict", a.verdict}};
}

CheckResult neighborhood_invariants() {
    CheckResult out{"neighborhood_invariants", true, nlohmann::json::object()};
    const auto adj = grid_adjacency(2, 3);
    const int T = 5;
    for (const auto kind : {NeighborhoodKind::spatial, NeighborhoodKind::temporal, NeighborhoodKind::union_,
                            NeighborhoodKind::product}) {
        const auto sys = build_neighborhoods(adj, T, {kind, 2});
        bool duality = true;
        bool self = true;
        for (std::size_t a = 0; a < sys.size(); ++a) {
            const auto fa = sys.forward_flat(a);
            self = self && std::find(fa.begin(), fa.end(), a) != fa.end();
            for (std::size_t b = 0; b < sys.size(); ++b) {
                const auto fb = sys.forward_flat(b);
                const auto ra = sys.reversed_flat(a);
                const bool in_forward = std::find(fb.begin(), fb.end(), a) != fb.end();
                const bool in_reversed = std::find(ra.begin(), ra.end(), b) != ra.end();
                duality = duality && in_forward == in_reversed;
            }
        }
        bool extra = true;
        if (kind == NeighborhoodKind::spatial) {
            for (std::size_t a = 0; a < sys.size(); ++a) {
                const auto f = sys.forward_flat(a);
                const auto r = sys.reversed_flat(a);
                extra = extra && std::equal(f.begin(), f.end(), r.begin(), r.end());
            }
        } else if (kind == NeighborhoodKind::temporal) {
            for (int i = 1; i <= sys.units(); ++i) {
                for (int t = 1; t < T; ++t) {
                    const auto later = sys.forward({i, t + 1});
                    const auto now = sys.forward({i, t});
                    extra = extra && std::find(later.begin(), later.end(), SiteIndex{i, t}) != later.end() &&
                            std::find(now.begin(), now.end(), SiteIndex{i, t + 1}) == now.end();
                }
            }
        }
        out.detail[to_string(kind)] = {{"inversion_duality", duality}, {"self_inclusion", self}, {"kind_specific", extra}};
        out.passed = out.passed && duality && self && extra;
    }
    return out;
}

}  // namespace

ValidationReport run_validation(const ValidationOptions& opts) {
    if (opts.reps < 10000) throw std::invalid_argument("validation needs at least 10^4 replications");
    ValidationReport report;
    report.options = opts;
    const double tol = correlation_tolerance(opts.reps);

    {
        const auto sys = build_neighborhoods(grid_adjacency(3, 3), 1, {NeighborhoodKind::spatial, 1});
        const auto p = STNParams::constant(sys, 0.0, 1.0, 10.0);
        const auto m = check_stn_marginals(p, sys, 200000, opts.seed + 1, 0.01, 0.02);
        report.checks.push_back({"stn_marginal_moments", m.passed,
                                 {{"lattice", "3x3 spatial"}, {"reps", 200000}, {"worst_mean_error", m.worst_mean_error},
                                  {"worst_variance_error", m.worst_variance_error}, {"mean_tolerance", 0.01},
                                  {"variance_tolerance", 0.02}}});
    }
    {
        STN2Params p;
        p.n = 3;
        p.T = 2;
        p.m0 = 0.0;
        p.c0 = 1.0;
        p.clink.emplace(SitePair({1, 1}, {2, 1}), 2.0);
        p.clink.emplace(SitePair({2, 1}, {3, 1}), 0.5);
        p.clink.emplace(SitePair({1, 1}, {1, 2}), 5.0);
        p.clink.emplace(SitePair({2, 2}, {3, 2}), 1.0);
        const auto m = check_stn2_marginals(p, 200000, opts.seed + 2, 0.01, 0.02);
        report.checks.push_back({"stn2_marginal_moments", m.passed,
                                 {{"reps", 200000}, {"worst_mean_error", m.worst_mean_error},
                                  {"worst_variance_error", m.worst_variance_error}}});
    }
    {
        // Two components 1 - 2 and 3 - 4: forward sets {1,2} and {3,4}.
        AdjacencySpec adj;
        adj.n = 4;
        adj.edges = {{1, 2}, {3, 4}};
        const auto sys = build_neighborhoods(adj, 1, {NeighborhoodKind::spatial, 1});
        const auto p = STNParams::constant(sys, 0.0, 1.0, 1.0);
        const double closed = prop1_correlation(p, sys, {1, 1}, {3, 1});
        const double mc = mc_correlation(p, sys, {1, 1}, {3, 1}, opts.reps, opts.seed + 3);
        report.checks.push_back({"correlation_disjoint_neighborhoods", std::abs(mc - closed) <= tol,
                                 {{"closed_form", closed}, {"monte_carlo", mc}, {"tolerance", tol}}});
    }
    {
        const auto a = arbitrate_prop1_overlap(opts.reps, opts.seed + 4, tol);
        report.checks.push_back({"prop1_arbitration", a.published_agrees != a.rederived_agrees, to_json(a)});
    }
    {
        const auto a = arbitrate_prop2_single_link(opts.reps, opts.seed + 5, tol);
        report.checks.push_back({"prop2_arbitration", a.published_agrees != a.rederived_agrees, to_json(a)});
    }
    {
        CheckResult c{"conditional_joint_consistency", true, nlohmann::json::object()};
        std::uint64_t offset = 10;
        for (const auto kind : {NeighborhoodKind::spatial, NeighborhoodKind::temporal, NeighborhoodKind::union_,
                                NeighborhoodKind::product}) {
            const auto r = check_conditional_consistency(kind, 3, 4, 2, 100, opts.seed + offset++);
            c.detail[to_string(kind)] = {{"alpha", r.alpha}, {"beta", r.beta}, {"gamma", r.gamma},
                                         {"omega", r.omega}, {"tau", r.tau},     {"states", r.states}};
            c.passed = c.passed && r.worst() <= 1e-8;
        }
        c.detail["tolerance"] = 1e-8;
        report.checks.push_back(std::move(c));
    }
    report.checks.push_back(neighborhood_invariants());
    return report;
}

}  // namespace stvc
