#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stvc {

/// A lattice site: unit in 1..n, time in 1..T.
struct SiteIndex {
    int unit = 1;
    int time = 1;

    friend auto operator<=>(const SiteIndex&, const SiteIndex&) = default;
};

std::string to_string(const SiteIndex& s);

/// Undirected spatial adjacency between units 1..n.
struct AdjacencySpec {
    int n = 0;
    /// Unordered pairs stored as (min, max), sorted, unique.
    std::vector<std::pair<int, int>> edges;
    /// Number of edges listed by only one of their endpoints in the source.
    int one_sided_edges = 0;

    /// Neighbor lists per unit (index 0 is unit 1), sorted ascending.
    std::vector<std::vector<int>> neighbors() const;
    std::vector<int> degrees() const;
};

/// Parses "ID: ID ID ..." lines. '#' lines and blank lines are skipped.
/// Throws std::invalid_argument on malformed lines, ids <= 0 or self-loops.
AdjacencySpec parse_adjacency(std::string_view text);
AdjacencySpec read_adjacency_file(const std::filesystem::path& path);

enum class NeighborhoodKind { spatial, temporal, union_, product };

std::string to_string(NeighborhoodKind kind);
NeighborhoodKind parse_neighborhood_kind(std::string_view name);

struct NeighborhoodConfig {
    NeighborhoodKind kind = NeighborhoodKind::spatial;
    /// Temporal order; ignored for spatial neighborhoods.
    int q = 1;
};

/// Forward neighbor sets and their inversion over an n x T lattice.
///
/// Sites are addressed either by SiteIndex or by a flat index
/// (unit - 1) * T + (time - 1). Every forward set contains its own site and
/// is sorted unit-major, then by time. Immutable after construction.
class NeighborhoodSystem {
public:
    /// Generic constructor from arbitrary forward sets, one per flat site.
    /// Missing self-entries are added; duplicates are removed.
    NeighborhoodSystem(int n, int T, std::vector<std::vector<SiteIndex>> forward);

    int units() const { return n_; }
    int times() const { return T_; }
    std::size_t size() const { return forward_.size(); }

    std::size_t flat(const SiteIndex& s) const {
        return static_cast<std::size_t>(s.unit - 1) * T_ + static_cast<std::size_t>(s.time - 1);
    }
    SiteIndex site(std::size_t flat_index) const {
        return {static_cast<int>(flat_index / T_) + 1, static_cast<int>(flat_index % T_) + 1};
    }
    bool contains(const SiteIndex& s) const {
        return s.unit >= 1 && s.unit <= n_ && s.time >= 1 && s.time <= T_;
    }

    std::span<const SiteIndex> forward(const SiteIndex& s) const;
    std::span<const SiteIndex> reversed(const SiteIndex& s) const;

    /// Flat-index views of the same sets, for the samplers' inner loops.
    std::span<const std::size_t> forward_flat(std::size_t i) const { return forward_flat_[i]; }
    std::span<const std::size_t> reversed_flat(std::size_t i) const { return reversed_flat_[i]; }

private:
    int n_;
    int T_;
    std::vector<std::vector<SiteIndex>> forward_;
    std::vector<std::vector<SiteIndex>> reversed_;
    std::vector<std::vector<std::size_t>> forward_flat_;
    std::vector<std::vector<std::size_t>> reversed_flat_;
};

/// Builds spatial, temporal, union or product neighborhoods. Temporal lags
/// before time 1 are dropped.
NeighborhoodSystem build_neighborhoods(const AdjacencySpec& adj, int T, const NeighborhoodConfig& cfg);

struct NeighborhoodSizeStats {
    std::size_t min = 0;
    double median = 0.0;
    std::size_t max = 0;
};

NeighborhoodSizeStats neighborhood_stats(const NeighborhoodSystem& sys);

}  // namespace stvc
