#include "stvc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
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

int parse_id(std::string_view token, int line_no) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                    ": malformed unit id '" + std::string(token) + "'");
    }
    if (value <= 0) {
        throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                    ": unit id must be positive, got " + std::to_string(value));
    }
    return value;
}

}  // namespace

std::string to_string(const SiteIndex& s) {
    return "(" + std::to_string(s.unit) + "," + std::to_string(s.time) + ")";
}

std::vector<std::vector<int>> AdjacencySpec::neighbors() const {
    std::vector<std::vector<int>> out(n);
    for (const auto& [a, b] : edges) {
        out[a - 1].push_back(b);
        out[b - 1].push_back(a);
    }
    for (auto& list : out) std::sort(list.begin(), list.end());
    return out;
}

std::vector<int> AdjacencySpec::degrees() const {
    std::vector<int> deg(n, 0);
    for (const auto& [a, b] : edges) {
        ++deg[a - 1];
        ++deg[b - 1];
    }
    return deg;
}

AdjacencySpec parse_adjacency(std::string_view text) {
    std::set<std::pair<int, int>> directed;
    int max_id = 0;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                        ": expected 'ID: ID ID ...'");
        }
        const int unit = parse_id(trim(line.substr(0, colon)), line_no);
        max_id = std::max(max_id, unit);

        auto rest = line.substr(colon + 1);
        while (true) {
            rest = trim(rest);
            if (rest.empty()) break;
            const auto space = rest.find_first_of(" \t");
            const auto token = rest.substr(0, space);
            const int other = parse_id(token, line_no);
            if (other == unit) {
                throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                            ": self-loop on unit " + std::to_string(unit));
            }
            max_id = std::max(max_id, other);
            directed.emplace(unit, other);
            if (space == std::string_view::npos) break;
            rest = rest.substr(space);
        }
    }

    AdjacencySpec adj;
    adj.n = max_id;
    std::set<std::pair<int, int>> undirected;
    for (const auto& [a, b] : directed) {
        if (!directed.contains({b, a})) ++adj.one_sided_edges;
        undirected.emplace(std::min(a, b), std::max(a, b));
    }
    adj.edges.assign(undirected.begin(), undirected.end());
    return adj;
}

AdjacencySpec read_adjacency_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open adjacency file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_adjacency(buf.str());
}

std::string to_string(NeighborhoodKind kind) {
    switch (kind) {
        case NeighborhoodKind::spatial: return "s";
        case NeighborhoodKind::temporal: return "t";
        case NeighborhoodKind::union_: return "s+t";
        case NeighborhoodKind::product: return "sxt";
    }
    return "?";
}

NeighborhoodKind parse_neighborhood_kind(std::string_view name) {
    if (name == "s" || name == "spatial") return NeighborhoodKind::spatial;
    if (name == "t" || name == "temporal") return NeighborhoodKind::temporal;
    if (name == "s+t" || name == "union") return NeighborhoodKind::union_;
    if (name == "sxt" || name == "s*t" || name == "product") return NeighborhoodKind::product;
    throw std::invalid_argument("unknown neighborhood kind '" + std::string(name) + "'");
}

NeighborhoodSystem::NeighborhoodSystem(int n, int T, std::vector<std::vector<SiteIndex>> forward)
    : n_(n), T_(T), forward_(std::move(forward)) {
    if (n < 1 || T < 1) throw std::invalid_argument("lattice dimensions must be positive");
    const std::size_t sites = static_cast<std::size_t>(n) * T;
    if (forward_.size() != sites) {
        throw std::invalid_argument("expected " + std::to_string(sites) + " forward sets, got " +
                                    std::to_string(forward_.size()));
    }

    reversed_.assign(sites, {});
    forward_flat_.assign(sites, {});
    reversed_flat_.assign(sites, {});
    for (std::size_t i = 0; i < sites; ++i) {
        auto& set = forward_[i];
        set.push_back(site(i));
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        for (const auto& nb : set) {
            if (!contains(nb)) {
                throw std::invalid_argument("neighbor " + to_string(nb) + " of " + to_string(site(i)) +
                                            " lies outside the lattice");
            }
            forward_flat_[i].push_back(flat(nb));
        }
    }
    // Visiting sites in order keeps every reversed list sorted.
    for (std::size_t i = 0; i < sites; ++i) {
        for (const auto j : forward_flat_[i]) {
            reversed_[j].push_back(site(i));
            reversed_flat_[j].push_back(i);
        }
    }
}

std::span<const SiteIndex> NeighborhoodSystem::forward(const SiteIndex& s) const {
    if (!contains(s)) throw std::out_of_range("site " + to_string(s) + " outside the lattice");
    return forward_[flat(s)];
}

std::span<const SiteIndex> NeighborhoodSystem::reversed(const SiteIndex& s) const {
    if (!contains(s)) throw std::out_of_range("site " + to_string(s) + " outside the lattice");
    return reversed_[flat(s)];
}

NeighborhoodSystem build_neighborhoods(const AdjacencySpec& adj, int T, const NeighborhoodConfig& cfg) {
    if (T < 1) throw std::invalid_argument("T must be at least 1");
    if (adj.n < 1) throw std::invalid_argument("adjacency has no units");
    if (cfg.kind != NeighborhoodKind::spatial && cfg.q < 1) {
        throw std::invalid_argument("temporal order q must be at least 1");
    }
    for (const auto& [a, b] : adj.edges) {
        if (a < 1 || b > adj.n || a == b) throw std::invalid_argument("invalid adjacency edge");
    }

    const auto nbrs = adj.neighbors();
    std::vector<std::vector<SiteIndex>> forward(static_cast<std::size_t>(adj.n) * T);
    for (int i = 1; i <= adj.n; ++i) {
        for (int t = 1; t <= T; ++t) {
            auto& set = forward[static_cast<std::size_t>(i - 1) * T + (t - 1)];
            const int first_lag = std::max(1, t - cfg.q);
            const bool spatial = cfg.kind != NeighborhoodKind::temporal;
            const bool temporal = cfg.kind != NeighborhoodKind::spatial;
            if (spatial) {
                for (const int j : nbrs[i - 1]) set.push_back({j, t});
            }
            if (temporal) {
                for (int s = first_lag; s <= t; ++s) set.push_back({i, s});
            }
            if (cfg.kind == NeighborhoodKind::product) {
                for (const int j : nbrs[i - 1]) {
                    for (int s = first_lag; s < t; ++s) set.push_back({j, s});
                }
            }
        }
    }
    return NeighborhoodSystem(adj.n, T, std::move(forward));
}

NeighborhoodSizeStats neighborhood_stats(const NeighborhoodSystem& sys) {
    std::vector<std::size_t> sizes;
    sizes.reserve(sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i) sizes.push_back(sys.forward_flat(i).size());
    std::sort(sizes.begin(), sizes.end());
    const std::size_t m = sizes.size();
    NeighborhoodSizeStats stats;
    stats.min = sizes.front();
    stats.max = sizes.back();
    stats.median = m % 2 == 1 ? static_cast<double>(sizes[m / 2])
                              : 0.5 * static_cast<double>(sizes[m / 2 - 1] + sizes[m / 2]);
    return stats;
}

}  // namespace stvc
