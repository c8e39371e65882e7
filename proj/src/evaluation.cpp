#include "stvc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace stvc {

CpoMatrix cpo(const Chain& chain, const PanelData& data) {
    if (chain.samples.empty()) throw std::invalid_argument("CPO needs a nonempty chain");
    if (chain.n != data.n || chain.T != data.T || chain.p != data.p) {
        throw std::invalid_argument("chain dimensions do not match the panel");
    }
    const std::size_t R = chain.samples.size();
    const std::size_t sites = data.sites();
    CpoMatrix out;
    out.values.resize(sites);
    out.log_values.resize(sites);

    std::vector<double> log_dens(R);
    for (std::size_t s = 0; s < sites; ++s) {
        bool underflow = false;
        double reciprocal_sum = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            log_dens[r] = normal_log_density(data.y[s], chain.predictor(r, data, s), chain.precision(r, s));
            if (!std::isfinite(log_dens[r])) {
                const SiteIndex site{static_cast<int>(s / data.T) + 1, static_cast<int>(s % data.T) + 1};
                throw std::domain_error("CPO undefined at site " + to_string(site) + ": density of draw " +
                                        std::to_string(r) + " is not finite");
            }
            const double dens = std::exp(log_dens[r]);
            if (dens == 0.0) underflow = true;
            reciprocal_sum += 1.0 / dens;
        }
        if (!underflow && std::isfinite(reciprocal_sum)) {
            out.values[s] = static_cast<double>(R) / reciprocal_sum;
            out.log_values[s] = std::log(out.values[s]);
        } else {
            // log of the mean reciprocal, shifted by the largest term.
            const double shift = -*std::min_element(log_dens.begin(), log_dens.end());
            double acc = 0.0;
            for (const double ld : log_dens) acc += std::exp(-ld - shift);
            out.log_values[s] = std::log(static_cast<double>(R)) - (shift + std::log(acc));
            out.values[s] = std::exp(out.log_values[s]);
        }
    }
    return out;
}

double lpml(const CpoMatrix& cpo) {
    return std::accumulate(cpo.log_values.begin(), cpo.log_values.end(), 0.0);
}

double sorted_quantile(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(pos));
    const auto upper = std::min(lower + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lower);
    return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

namespace {

ParameterSummary summarize_series(std::vector<double> values, double level) {
    ParameterSummary out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const double tail = 0.5 * (1.0 - level);
    out.lo = sorted_quantile(values, tail);
    out.hi = sorted_quantile(values, 1.0 - tail);
    // A constant series must report the constant, not a rounded sum.
    if (values.front() == values.back()) out.mean = values.front();
    return out;
}

}  // namespace

std::vector<ParameterSummary> summarize(const Chain& chain, double level) {
    if (chain.samples.empty()) throw std::invalid_argument("cannot summarize an empty chain");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credible level must lie in (0, 1)");

    std::vector<ParameterSummary> out;
    auto add = [&](const std::string& block, int unit, int time, int k, auto&& extract) {
        std::vector<double> values;
        values.reserve(chain.samples.size());
        for (const auto& d : chain.samples) values.push_back(extract(d));
        auto s = summarize_series(std::move(values), level);
        s.block = block;
        s.unit = unit;
        s.time = time;
        s.k = k;
        out.push_back(std::move(s));
    };

    const int p = chain.p;
    add("alpha", 0, 0, 0, [](const Draw& d) { return d.alpha; });

    auto add_site_block = [&](const std::string& block, auto member) {
        for (int i = 1; i <= chain.n; ++i) {
            for (int t = 1; t <= chain.T; ++t) {
                const std::size_t site = static_cast<std::size_t>(i - 1) * chain.T + (t - 1);
                for (int k = 0; k < p; ++k) {
                    add(block, i, t, k + 1, [&](const Draw& d) { return (d.*member)[site * p + k]; });
                }
            }
        }
    };

    switch (chain.model_tag) {
        case ModelTag::STVC:
            add_site_block("beta", &Draw::beta);
            if (!chain.samples.front().gamma.empty()) add_site_block("gamma", &Draw::gamma);
            for (int k = 0; k < p; ++k) add("omega", 0, 0, k + 1, [&](const Draw& d) { return d.omega[k]; });
            for (int i = 1; i <= chain.n; ++i) add("tau", i, 0, 0, [&](const Draw& d) { return d.tau[i - 1]; });
            break;
        case ModelTag::Model0:
            for (int i = 1; i <= chain.n; ++i) {
                for (int k = 0; k < p; ++k) {
                    add("beta", i, 0, k + 1, [&](const Draw& d) { return d.beta[(i - 1) * p + k]; });
                }
            }
            for (int i = 1; i <= chain.n; ++i) add("tau", i, 0, 0, [&](const Draw& d) { return d.tau[i - 1]; });
            break;
        case ModelTag::Model00:
            for (int k = 0; k < p; ++k) add("beta", 0, 0, k + 1, [&](const Draw& d) { return d.beta[k]; });
            add("tau", 0, 0, 0, [](const Draw& d) { return d.tau.front(); });
            break;
    }
    return out;
}

std::vector<RankingRow> compare(const std::vector<FitReport>& reports) {
    if (reports.size() < 2) throw std::invalid_argument("compare needs at least two reports");
    std::vector<RankingRow> rows;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        rows.push_back({i, r.dataset, to_string(r.model_tag), r.neighborhood, r.lpml, false});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) { return a.lpml > b.lpml; });

    std::map<std::pair<std::string, std::string>, bool> seen;
    for (auto& row : rows) {
        const std::string group = row.model_tag == "STVC" ? row.neighborhood.kind : row.model_tag;
        auto [it, inserted] = seen.try_emplace({row.dataset, group}, true);
        row.best_in_group = inserted;
    }
    return rows;
}

}  // namespace stvc
