#include "stvc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stvc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

std::optional<double> try_parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

double parse_double(std::string_view s, std::string_view what, std::size_t line_no) {
    const auto v = try_parse_double(s);
    if (!v) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": non-numeric " + std::string(what) +
                                    " '" + std::string(s) + "'");
    }
    return *v;
}

/// Sorted distinct labels: numeric order if every label is a number.
std::vector<std::string> ordered_labels(const std::set<std::string>& labels) {
    std::vector<std::string> out(labels.begin(), labels.end());
    const bool numeric = std::all_of(out.begin(), out.end(), [](const std::string& l) { return try_parse_double(l).has_value(); });
    if (numeric) {
        std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
            return *try_parse_double(a) < *try_parse_double(b);
        });
    }
    return out;
}

std::map<std::string, int> dense_index(const std::vector<std::string>& labels) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], static_cast<int>(i) + 1);
    return index;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("cannot format value");
    return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

PanelData load_panel(std::string_view csv, const IngestionSpec& spec) {
    const auto lines = split_lines(csv);
    std::size_t header_line = 0;
    while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
    if (header_line == lines.size()) throw std::invalid_argument("panel CSV is empty");

    const auto header = split_fields(lines[header_line]);
    const std::size_t response_cols = spec.response == ResponseMode::direct ? 1 : 2;
    if (header.size() < 2 + response_cols + 1) {
        throw std::invalid_argument("panel header needs unit, time, response column(s) and at least one covariate");
    }
    const int p = static_cast<int>(header.size() - 2 - response_cols);

    struct Row {
        std::string unit;
        std::string time;
        double y;
        std::vector<double> x;
        std::size_t line_no;
    };
    std::vector<Row> rows;
    std::set<std::string> units;
    std::set<std::string> times;
    for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const std::size_t line_no = li + 1;
        const auto fields = split_fields(lines[li]);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        Row row{std::string(fields[0]), std::string(fields[1]), 0.0, {}, line_no};
        if (spec.response == ResponseMode::direct) {
            row.y = parse_double(fields[2], "response", line_no);
        } else {
            const double count = parse_double(fields[2], "count", line_no);
            const double population = parse_double(fields[3], "population", line_no);
            if (!(count > 0.0) || !(population > 0.0)) {
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": count and population must be positive in log-rate mode");
            }
            row.y = std::log(count / population);
        }
        for (int k = 0; k < p; ++k) {
            double v = parse_double(fields[2 + response_cols + k], "covariate", line_no);
            if (static_cast<std::size_t>(k) < spec.log_covariates.size() && spec.log_covariates[k]) {
                if (!(v > 0.0)) {
                    throw std::invalid_argument("line " + std::to_string(line_no) + ": covariate " +
                                                std::to_string(k + 1) + " must be positive for a log transform");
                }
                v = std::log(v);
            }
            row.x.push_back(v);
        }
        units.insert(row.unit);
        times.insert(row.time);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("panel CSV has no data rows");

    PanelData data;
    data.unit_labels = ordered_labels(units);
    data.time_labels = ordered_labels(times);
    data.n = static_cast<int>(data.unit_labels.size());
    data.T = static_cast<int>(data.time_labels.size());
    data.p = p;
    const auto unit_index = dense_index(data.unit_labels);
    const auto time_index = dense_index(data.time_labels);

    data.y.assign(data.sites(), 0.0);
    data.x.assign(data.sites() * p, 0.0);
    std::vector<bool> filled(data.sites(), false);
    for (const auto& row : rows) {
        const std::size_t s = data.flat({unit_index.at(row.unit), time_index.at(row.time)});
        if (filled[s]) {
            throw std::invalid_argument("line " + std::to_string(row.line_no) + ": duplicate cell (" + row.unit +
                                        "," + row.time + ")");
        }
        filled[s] = true;
        data.y[s] = row.y;
        std::copy(row.x.begin(), row.x.end(), data.x.begin() + static_cast<std::ptrdiff_t>(s * p));
    }
    std::string gaps;
    std::size_t missing = 0;
    for (std::size_t s = 0; s < data.sites(); ++s) {
        if (filled[s]) continue;
        if (++missing <= 20) {
            gaps += " (" + data.unit_labels[s / data.T] + "," + data.time_labels[s % data.T] + ")";
        }
    }
    if (missing > 0) {
        throw std::invalid_argument("incomplete panel, " + std::to_string(missing) + " missing (unit,time) cells:" +
                                    gaps + (missing > 20 ? " ..." : ""));
    }
    data.validate();
    return data;
}

PanelData read_panel_file(const std::filesystem::path& path, const IngestionSpec& spec) {
    return load_panel(read_text_file(path), spec);
}

std::string panel_to_csv(const PanelData& data) {
    std::ostringstream out;
    out << "unit,time,y";
    for (int k = 1; k <= data.p; ++k) out << ",x" << k;
    out << '\n';
    for (int i = 1; i <= data.n; ++i) {
        for (int t = 1; t <= data.T; ++t) {
            const std::size_t s = data.flat({i, t});
            out << (data.unit_labels.empty() ? std::to_string(i) : data.unit_labels[i - 1]) << ','
                << (data.time_labels.empty() ? std::to_string(t) : data.time_labels[t - 1]) << ','
                << format_double(data.y[s]);
            for (int k = 0; k < data.p; ++k) out << ',' << format_double(data.covariate(s, k));
            out << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Run configuration

void RunConfig::validate() const {
    if (neighborhood.kind != NeighborhoodKind::spatial && neighborhood.q < 1) {
        throw std::invalid_argument("neighborhood q must be at least 1");
    }
    if (neighborhood.kind != NeighborhoodKind::temporal && model == ModelTag::STVC && !adjacency) {
        throw std::invalid_argument("neighborhood kind '" + to_string(neighborhood.kind) + "' needs an adjacency file");
    }
    chain.validate();
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    if (!(hyper.c_alpha > 0.0) || !(hyper.c0 > 0.0) || !(hyper.a0 > 0.0) || !(hyper.b0 > 0.0)) {
        throw std::invalid_argument("c_alpha, c0, a0 and b0 must be positive");
    }
    for (const double c : hyper.c) {
        if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
    }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{"dataset", "data", "adjacency", "ingestion", "neighborhood", "hyper",
                                            "chain", "model", "out", "level", "simulate"};
    return keys;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known_keys().contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    }
    RunConfig cfg;
    read_if(j, "dataset", cfg.dataset);
    if (j.contains("data") && !j["data"].is_null()) cfg.data = resolve(base_dir, j["data"].get<std::string>());
    if (j.contains("adjacency") && !j["adjacency"].is_null()) {
        cfg.adjacency = resolve(base_dir, j["adjacency"].get<std::string>());
    }
    if (j.contains("ingestion")) {
        const auto& ing = j["ingestion"];
        const auto mode = ing.value("response", std::string("direct"));
        if (mode == "direct") {
            cfg.ingestion.response = ResponseMode::direct;
        } else if (mode == "log_rate") {
            cfg.ingestion.response = ResponseMode::log_rate;
        } else {
            throw std::invalid_argument("unknown response mode '" + mode + "'");
        }
        read_if(ing, "log_covariates", cfg.ingestion.log_covariates);
    }
    if (j.contains("neighborhood")) {
        const auto& nb = j["neighborhood"];
        if (nb.contains("kind")) cfg.neighborhood.kind = parse_neighborhood_kind(nb["kind"].get<std::string>());
        read_if(nb, "q", cfg.neighborhood.q);
    }
    if (j.contains("hyper")) {
        const auto& h = j["hyper"];
        read_if(h, "m_alpha", cfg.hyper.m_alpha);
        read_if(h, "c_alpha", cfg.hyper.c_alpha);
        read_if(h, "m0", cfg.hyper.m0);
        read_if(h, "c0", cfg.hyper.c0);
        if (h.contains("c")) {
            cfg.hyper.c = h["c"].is_array() ? h["c"].get<std::vector<double>>() : std::vector<double>{h["c"].get<double>()};
        }
        read_if(h, "a0", cfg.hyper.a0);
        read_if(h, "b0", cfg.hyper.b0);
    }
    if (j.contains("chain")) {
        const auto& c = j["chain"];
        read_if(c, "iterations", cfg.chain.iterations);
        read_if(c, "burn_in", cfg.chain.burn_in);
        read_if(c, "thin", cfg.chain.thin);
        read_if(c, "seed", cfg.chain.seed);
        read_if(c, "keep_gamma", cfg.chain.keep_gamma);
    }
    if (j.contains("model")) cfg.model = parse_model_tag(j["model"].get<std::string>());
    if (j.contains("out")) cfg.out = resolve(base_dir, j["out"].get<std::string>());
    read_if(j, "level", cfg.level);
    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        read_if(s, "n", cfg.simulation.n);
        read_if(s, "T", cfg.simulation.T);
        read_if(s, "p", cfg.simulation.p);
        read_if(s, "alpha", cfg.simulation.alpha);
        if (s.contains("tau")) {
            cfg.simulation.tau = s["tau"].is_array() ? s["tau"].get<std::vector<double>>()
                                                     : std::vector<double>{s["tau"].get<double>()};
        }
        read_if(s, "beta_mode", cfg.simulation.beta_mode);
        read_if(s, "beta_value", cfg.simulation.beta_value);
        if (s.contains("covariates_from") && !s["covariates_from"].is_null()) {
            cfg.simulation.covariates_from = resolve(base_dir, s["covariates_from"].get<std::string>());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("invalid JSON in " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

json to_json(const RunConfig& cfg) {
    json j;
    j["dataset"] = cfg.dataset;
    j["data"] = cfg.data.string();
    j["adjacency"] = cfg.adjacency ? json(cfg.adjacency->string()) : json(nullptr);
    j["ingestion"] = {{"response", cfg.ingestion.response == ResponseMode::direct ? "direct" : "log_rate"},
                      {"log_covariates", cfg.ingestion.log_covariates}};
    j["neighborhood"] = {{"kind", to_string(cfg.neighborhood.kind)}, {"q", cfg.neighborhood.q}};
    j["hyper"] = {{"m_alpha", cfg.hyper.m_alpha}, {"c_alpha", cfg.hyper.c_alpha}, {"m0", cfg.hyper.m0},
                  {"c0", cfg.hyper.c0},           {"a0", cfg.hyper.a0},           {"b0", cfg.hyper.b0}};
    j["hyper"]["c"] = cfg.hyper.c.size() == 1 ? json(cfg.hyper.c.front()) : json(cfg.hyper.c);
    j["chain"] = {{"iterations", cfg.chain.iterations},
                  {"burn_in", cfg.chain.burn_in},
                  {"thin", cfg.chain.thin},
                  {"seed", cfg.chain.seed},
                  {"keep_gamma", cfg.chain.keep_gamma}};
    j["model"] = to_string(cfg.model);
    j["out"] = cfg.out.string();
    j["level"] = cfg.level;
    json sim = {{"n", cfg.simulation.n},
                {"T", cfg.simulation.T},
                {"p", cfg.simulation.p},
                {"alpha", cfg.simulation.alpha},
                {"beta_mode", cfg.simulation.beta_mode},
                {"beta_value", cfg.simulation.beta_value}};
    sim["tau"] = cfg.simulation.tau.size() == 1 ? json(cfg.simulation.tau.front()) : json(cfg.simulation.tau);
    sim["covariates_from"] =
        cfg.simulation.covariates_from ? json(cfg.simulation.covariates_from->string()) : json(nullptr);
    j["simulate"] = std::move(sim);
    return j;
}

NeighborhoodSystem neighborhoods_for(const RunConfig& cfg, int n, int T) {
    AdjacencySpec adj;
    if (cfg.adjacency) {
        adj = read_adjacency_file(*cfg.adjacency);
        if (adj.n > n) {
            throw std::invalid_argument("adjacency mentions unit " + std::to_string(adj.n) + " but the panel has " +
                                        std::to_string(n) + " units");
        }
        adj.n = n;
    } else {
        if (cfg.neighborhood.kind != NeighborhoodKind::temporal) {
            throw std::invalid_argument("spatial neighborhoods need an adjacency file");
        }
        adj.n = n;
    }
    return build_neighborhoods(adj, T, cfg.neighborhood);
}

// ---------------------------------------------------------------------------
// Chains

namespace {

std::string index_field(int v) { return v > 0 ? std::to_string(v) : std::string(); }

std::string rng_mode_name(RngMode m) { return m == RngMode::sequential ? "sequential" : "per_unit"; }

}  // namespace

std::string chain_to_csv(const Chain& chain, const json& run_config) {
    std::string out;
    out.reserve(chain.samples.size() * 64 * (1 + (chain.samples.empty() ? 0 : chain.samples.front().beta.size())));
    const auto& cfg = chain.config;
    out += "# format=stvc-chain-v1\n";
    out += "# model_tag=" + to_string(chain.model_tag) + "\n";
    out += "# n=" + std::to_string(chain.n) + "\n";
    out += "# T=" + std::to_string(chain.T) + "\n";
    out += "# p=" + std::to_string(chain.p) + "\n";
    out += "# iterations=" + std::to_string(cfg.iterations) + "\n";
    out += "# burn_in=" + std::to_string(cfg.burn_in) + "\n";
    out += "# thin=" + std::to_string(cfg.thin) + "\n";
    out += "# seed=" + std::to_string(cfg.seed) + "\n";
    out += "# keep_gamma=" + std::string(cfg.keep_gamma ? "1" : "0") + "\n";
    out += "# rng_mode=" + rng_mode_name(cfg.rng_mode) + "\n";
    if (!cfg.unit_keys.empty()) {
        out += "# unit_keys=";
        for (std::size_t i = 0; i < cfg.unit_keys.size(); ++i) {
            out += (i ? " " : "") + std::to_string(cfg.unit_keys[i]);
        }
        out += "\n";
    }
    out += "# generator=" + std::string(Rng::kName) + "\n";
    if (!run_config.is_null()) out += "# run_config=" + run_config.dump() + "\n";
    out += "iter,block,unit,time,k,value\n";

    const int n = chain.n;
    const int T = chain.T;
    const int p = chain.p;
    for (const auto& d : chain.samples) {
        const std::string it = std::to_string(d.iteration);
        auto row = [&](const char* block, int unit, int time, int k, double v) {
            out += it;
            out += ',';
            out += block;
            out += ',';
            out += index_field(unit);
            out += ',';
            out += index_field(time);
            out += ',';
            out += index_field(k);
            out += ',';
            out += format_double(v);
            out += '\n';
        };
        row("alpha", 0, 0, 0, d.alpha);
        switch (chain.model_tag) {
            case ModelTag::STVC:
                for (const auto* block : {"beta", "gamma"}) {
                    const auto& values = std::string_view(block) == "beta" ? d.beta : d.gamma;
                    if (values.empty()) continue;
                    for (int i = 1; i <= n; ++i) {
                        for (int t = 1; t <= T; ++t) {
                            const std::size_t s = static_cast<std::size_t>(i - 1) * T + (t - 1);
                            for (int k = 0; k < p; ++k) row(block, i, t, k + 1, values[s * p + k]);
                        }
                    }
                }
                for (int k = 0; k < p; ++k) row("omega", 0, 0, k + 1, d.omega[k]);
                for (int i = 1; i <= n; ++i) row("tau", i, 0, 0, d.tau[i - 1]);
                break;
            case ModelTag::Model0:
                for (int i = 1; i <= n; ++i) {
                    for (int k = 0; k < p; ++k) row("beta", i, 0, k + 1, d.beta[(i - 1) * p + k]);
                }
                for (int i = 1; i <= n; ++i) row("tau", i, 0, 0, d.tau[i - 1]);
                break;
            case ModelTag::Model00:
                for (int k = 0; k < p; ++k) row("beta", 0, 0, k + 1, d.beta[k]);
                row("tau", 0, 0, 0, d.tau.front());
                break;
        }
    }
    return out;
}

Chain chain_from_csv(std::string_view text) {
    const auto lines = split_lines(text);
    std::map<std::string, std::string> meta;
    std::size_t li = 0;
    for (; li < lines.size(); ++li) {
        const auto line = trim(lines[li]);
        if (line.empty()) continue;
        if (line.front() != '#') break;
        const auto body = trim(line.substr(1));
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) continue;
        meta.emplace(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
    }
    if (li == lines.size() || trim(lines[li]) != "iter,block,unit,time,k,value") {
        throw std::invalid_argument("chain file lacks the header 'iter,block,unit,time,k,value'");
    }
    auto need = [&](const char* key) -> const std::string& {
        const auto it = meta.find(key);
        if (it == meta.end()) throw std::invalid_argument(std::string("chain file lacks metadata '") + key + "'");
        return it->second;
    };
    auto need_int = [&](const char* key) { return std::stoll(need(key)); };

    Chain chain;
    chain.model_tag = parse_model_tag(need("model_tag"));
    chain.n = static_cast<int>(need_int("n"));
    chain.T = static_cast<int>(need_int("T"));
    chain.p = static_cast<int>(need_int("p"));
    chain.config.iterations = need_int("iterations");
    chain.config.burn_in = need_int("burn_in");
    chain.config.thin = need_int("thin");
    chain.config.seed = std::stoull(need("seed"));
    chain.config.keep_gamma = need("keep_gamma") == "1";
    if (const auto it = meta.find("rng_mode"); it != meta.end() && it->second == "per_unit") {
        chain.config.rng_mode = RngMode::per_unit;
    }
    if (const auto it = meta.find("unit_keys"); it != meta.end()) {
        std::istringstream keys(it->second);
        std::uint64_t key = 0;
        while (keys >> key) chain.config.unit_keys.push_back(key);
    }

    const int n = chain.n;
    const int T = chain.T;
    const int p = chain.p;
    const std::size_t sites = static_cast<std::size_t>(n) * T;
    auto blank_draw = [&](std::int64_t iter) {
        Draw d;
        d.iteration = iter;
        switch (chain.model_tag) {
            case ModelTag::STVC:
                d.beta.assign(sites * p, 0.0);
                if (chain.config.keep_gamma) d.gamma.assign(sites * p, 0.0);
                d.omega.assign(p, 0.0);
                d.tau.assign(n, 0.0);
                break;
            case ModelTag::Model0:
                d.beta.assign(static_cast<std::size_t>(n) * p, 0.0);
                d.tau.assign(n, 0.0);
                break;
            case ModelTag::Model00:
                d.beta.assign(p, 0.0);
                d.tau.assign(1, 0.0);
                break;
        }
        return d;
    };

    for (++li; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const std::size_t line_no = li + 1;
        const auto f = split_fields(lines[li]);
        if (f.size() != 6) throw std::invalid_argument("chain line " + std::to_string(line_no) + ": expected 6 fields");
        const auto iter = static_cast<std::int64_t>(parse_double(f[0], "iteration", line_no));
        if (chain.samples.empty() || chain.samples.back().iteration != iter) chain.samples.push_back(blank_draw(iter));
        Draw& d = chain.samples.back();
        auto index = [&](std::string_view field, int upper) {
            if (field.empty()) return 0;
            const int v = static_cast<int>(parse_double(field, "index", line_no));
            if (v < 1 || v > upper) throw std::invalid_argument("chain line " + std::to_string(line_no) + ": index out of range");
            return v;
        };
        const int unit = index(f[2], n);
        const int time = index(f[3], T);
        const int k = index(f[4], p);
        const double value = parse_double(f[5], "value", line_no);
        const auto block = f[1];

        auto site = [&] { return static_cast<std::size_t>(unit - 1) * T + (time - 1); };
        auto require = [&](bool ok) {
            if (!ok) throw std::invalid_argument("chain line " + std::to_string(line_no) + ": bad indices for block '" + std::string(block) + "'");
        };
        if (block == "alpha") {
            d.alpha = value;
        } else if (block == "beta" || block == "gamma") {
            auto& target = block == "beta" ? d.beta : d.gamma;
            require(k > 0 && !target.empty());
            switch (chain.model_tag) {
                case ModelTag::STVC: require(unit > 0 && time > 0); target[site() * p + (k - 1)] = value; break;
                case ModelTag::Model0: require(unit > 0); target[static_cast<std::size_t>(unit - 1) * p + (k - 1)] = value; break;
                case ModelTag::Model00: target[k - 1] = value; break;
            }
        } else if (block == "omega") {
            require(k > 0 && !d.omega.empty());
            d.omega[k - 1] = value;
        } else if (block == "tau") {
            if (chain.model_tag == ModelTag::Model00) {
                d.tau[0] = value;
            } else {
                require(unit > 0);
                d.tau[unit - 1] = value;
            }
        } else {
            throw std::invalid_argument("chain line " + std::to_string(line_no) + ": unknown block '" + std::string(block) + "'");
        }
    }
    return chain;
}

void persist_chain(const Chain& chain, const std::filesystem::path& path, const json& run_config) {
    write_text_file(path, chain_to_csv(chain, run_config));
}

Chain load_chain(const std::filesystem::path& path) { return chain_from_csv(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Reports

namespace {

json index_json(int v) { return v > 0 ? json(v) : json(nullptr); }

}  // namespace

json to_json(const FitReport& report, const RunConfig& cfg, const PanelData& data) {
    json j;
    j["dataset"] = report.dataset;
    j["lpml"] = report.lpml;
    j["model_tag"] = to_string(report.model_tag);
    j["neighborhood"] = {{"kind", report.neighborhood.kind},
                         {"q", report.neighborhood.q},
                         {"c", report.neighborhood.c},
                         {"median_size", report.neighborhood.median_size}};
    json summaries = json::array();
    for (const auto& s : report.summaries) {
        summaries.push_back({{"block", s.block},
                             {"unit", index_json(s.unit)},
                             {"time", index_json(s.time)},
                             {"k", index_json(s.k)},
                             {"mean", s.mean},
                             {"lo", s.lo},
                             {"hi", s.hi}});
    }
    j["summaries"] = std::move(summaries);
    j["cpo"] = report.cpo.values;
    j["log_cpo"] = report.cpo.log_values;
    j["config"] = to_json(cfg);
    j["seed"] = cfg.chain.seed;
    j["generator"] = std::string(Rng::kName);
    j["level"] = cfg.level;
    j["unit_labels"] = data.unit_labels;
    j["time_labels"] = data.time_labels;
    return j;
}

FitReport report_from_json(const json& j) {
    FitReport r;
    r.dataset = j.value("dataset", std::string("data"));
    r.lpml = j.at("lpml").get<double>();
    r.model_tag = parse_model_tag(j.at("model_tag").get<std::string>());
    if (j.contains("neighborhood")) {
        const auto& nb = j["neighborhood"];
        r.neighborhood.kind = nb.value("kind", std::string());
        r.neighborhood.q = nb.value("q", 0);
        r.neighborhood.c = nb.value("c", 0.0);
        r.neighborhood.median_size = nb.value("median_size", 0.0);
    }
    if (j.contains("cpo")) r.cpo.values = j["cpo"].get<std::vector<double>>();
    if (j.contains("log_cpo")) r.cpo.log_values = j["log_cpo"].get<std::vector<double>>();
    if (j.contains("summaries")) {
        for (const auto& s : j["summaries"]) {
            ParameterSummary ps;
            ps.block = s.at("block").get<std::string>();
            ps.unit = s["unit"].is_null() ? 0 : s["unit"].get<int>();
            ps.time = s["time"].is_null() ? 0 : s["time"].get<int>();
            ps.k = s["k"].is_null() ? 0 : s["k"].get<int>();
            ps.mean = s.at("mean").get<double>();
            ps.lo = s.at("lo").get<double>();
            ps.hi = s.at("hi").get<double>();
            r.summaries.push_back(std::move(ps));
        }
    }
    return r;
}

std::string summaries_to_csv(const std::vector<ParameterSummary>& summaries) {
    std::string out = "block,unit,time,k,mean,lo,hi\n";
    for (const auto& s : summaries) {
        out += s.block + ',' + index_field(s.unit) + ',' + index_field(s.time) + ',' + index_field(s.k) + ',' +
               format_double(s.mean) + ',' + format_double(s.lo) + ',' + format_double(s.hi) + '\n';
    }
    return out;
}

std::string ranking_to_csv(const std::vector<RankingRow>& rows) {
    std::string out = "rank,dataset,model,type,q,c,median_size,lpml,best\n";
    int rank = 1;
    for (const auto& r : rows) {
        out += std::to_string(rank++) + ',' + r.dataset + ',' + r.model_tag + ',' + r.neighborhood.kind + ',' +
               (r.neighborhood.q > 0 ? std::to_string(r.neighborhood.q) : std::string()) + ',' +
               format_double(r.neighborhood.c) + ',' + format_double(r.neighborhood.median_size) + ',' +
               format_double(r.lpml) + ',' + (r.best_in_group ? "1" : "0") + '\n';
    }
    return out;
}

}  // namespace stvc
