#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "stvc/graph.hpp"
#include "stvc/validation.hpp"

using namespace stvc;

namespace {

std::vector<SiteIndex> as_vector(std::span<const SiteIndex> s) { return {s.begin(), s.end()}; }

bool holds(std::span<const SiteIndex> set, const SiteIndex& s) {
    return std::find(set.begin(), set.end(), s) != set.end();
}

}  // namespace

TEST_CASE("parse_adjacency reads a path graph") {
    const auto adj = parse_adjacency("1: 2\n2: 1 3\n3: 2\n");
    CHECK(adj.n == 3);
    CHECK(adj.edges == std::vector<std::pair<int, int>>{{1, 2}, {2, 3}});
    CHECK(adj.one_sided_edges == 0);
}

TEST_CASE("parse_adjacency skips comments and blank lines and symmetrizes") {
    const auto adj = parse_adjacency("# header\n\n1: 2 3\n2:\n  # indented comment\n3: 1\n");
    CHECK(adj.n == 3);
    CHECK(adj.edges == std::vector<std::pair<int, int>>{{1, 2}, {1, 3}});
    // 1 lists 2, 2 does not list 1.
    CHECK(adj.one_sided_edges == 1);
}

TEST_CASE("parse_adjacency rejects bad input") {
    CHECK_THROWS_WITH_AS(parse_adjacency("1: 1"), doctest::Contains("self-loop"), std::invalid_argument);
    CHECK_THROWS_AS(parse_adjacency("1 2 3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_adjacency("0: 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_adjacency("1: -2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_adjacency("1: two"), std::invalid_argument);
}

TEST_CASE("Mexico adjacency fixture has degrees 1..8 with median 4") {
    const auto adj = read_adjacency_file(STVC_DATA_DIR "/mexico_states.adj");
    CHECK(adj.n == 32);
    CHECK(adj.one_sided_edges == 0);
    auto deg = adj.degrees();
    std::sort(deg.begin(), deg.end());
    CHECK(deg.front() == 1);
    CHECK(deg.back() == 8);
    CHECK((deg[15] + deg[16]) / 2.0 == doctest::Approx(4.0));
}

TEST_CASE("spatial neighborhoods on a path") {
    const auto sys = build_neighborhoods(path_adjacency(3), 5, {NeighborhoodKind::spatial, 1});
    CHECK(as_vector(sys.forward({2, 4})) == std::vector<SiteIndex>{{1, 4}, {2, 4}, {3, 4}});
    CHECK(as_vector(sys.forward({1, 1})) == std::vector<SiteIndex>{{1, 1}, {2, 1}});
}

TEST_CASE("temporal neighborhoods are clipped at the series start") {
    const auto sys = build_neighborhoods(path_adjacency(2), 8, {NeighborhoodKind::temporal, 3});
    CHECK(as_vector(sys.forward({1, 5})) == std::vector<SiteIndex>{{1, 2}, {1, 3}, {1, 4}, {1, 5}});
    CHECK(as_vector(sys.forward({2, 2})) == std::vector<SiteIndex>{{2, 1}, {2, 2}});
    CHECK(as_vector(sys.forward({2, 1})) == std::vector<SiteIndex>{{2, 1}});
}

TEST_CASE("product neighborhood of a degree-4 unit at an interior time has 20 sites") {
    // Star: unit 1 joined to 2..5.
    AdjacencySpec adj;
    adj.n = 5;
    adj.edges = {{1, 2}, {1, 3}, {1, 4}, {1, 5}};
    const auto sys = build_neighborhoods(adj, 10, {NeighborhoodKind::product, 3});
    CHECK(sys.forward({1, 7}).size() == 20);
    CHECK(sys.forward({2, 7}).size() == 8);
    const auto uni = build_neighborhoods(adj, 10, {NeighborhoodKind::union_, 3});
    CHECK(uni.forward({1, 7}).size() == 4 + 1 + 3);
}

TEST_CASE("isolated unit keeps itself as its only spatial neighbor") {
    AdjacencySpec adj;
    adj.n = 3;
    adj.edges = {{1, 2}};
    const auto sys = build_neighborhoods(adj, 2, {NeighborhoodKind::spatial, 1});
    CHECK(as_vector(sys.forward({3, 2})) == std::vector<SiteIndex>{{3, 2}});
}

TEST_CASE("neighborhood invariants hold for every kind") {
    const auto adj = read_adjacency_file(STVC_DATA_DIR "/mexico_states.adj");
    for (const auto kind : {NeighborhoodKind::spatial, NeighborhoodKind::temporal, NeighborhoodKind::union_,
                            NeighborhoodKind::product}) {
        for (const int q : {1, 3}) {
            CAPTURE(to_string(kind));
            CAPTURE(q);
            const int T = 7;
            const auto sys = build_neighborhoods(adj, T, {kind, q});
            const auto deg = adj.degrees();
            for (std::size_t a = 0; a < sys.size(); ++a) {
                const auto sa = sys.site(a);
                const auto fwd = sys.forward(sa);
                REQUIRE(holds(fwd, sa));
                REQUIRE(std::is_sorted(fwd.begin(), fwd.end()));
                for (const auto& nb : fwd) {
                    REQUIRE(sys.contains(nb));
                    // Inversion duality, one direction; the count check below closes it.
                    REQUIRE(holds(sys.reversed(nb), sa));
                }
                if (kind == NeighborhoodKind::spatial) {
                    for (const auto& nb : fwd) REQUIRE(nb.time == sa.time);
                    REQUIRE(as_vector(fwd) == as_vector(sys.reversed(sa)));
                }
                if (kind == NeighborhoodKind::temporal) {
                    std::vector<SiteIndex> expected;
                    for (int s = std::max(1, sa.time - q); s <= sa.time; ++s) expected.push_back({sa.unit, s});
                    REQUIRE(as_vector(fwd) == expected);
                    if (sa.time < T) {
                        REQUIRE(holds(sys.forward({sa.unit, sa.time + 1}), sa));
                        REQUIRE_FALSE(holds(fwd, SiteIndex{sa.unit, sa.time + 1}));
                    }
                }
                if (sa.time > q) {
                    const auto d = static_cast<std::size_t>(deg[sa.unit - 1]);
                    if (kind == NeighborhoodKind::union_) REQUIRE(fwd.size() == d + 1 + q);
                    if (kind == NeighborhoodKind::product) REQUIRE(fwd.size() == (d + 1) * (q + 1));
                }
            }
            std::size_t forward_total = 0;
            std::size_t reversed_total = 0;
            for (std::size_t a = 0; a < sys.size(); ++a) {
                forward_total += sys.forward_flat(a).size();
                reversed_total += sys.reversed_flat(a).size();
            }
            CHECK(forward_total == reversed_total);
        }
    }
}

TEST_CASE("generic constructor adds self and validates sites") {
    std::vector<std::vector<SiteIndex>> fwd(4);
    fwd[3] = {{1, 1}, {1, 1}};  // (2,2) depends on (1,1), listed twice
    const NeighborhoodSystem sys(2, 2, fwd);
    CHECK(as_vector(sys.forward({2, 2})) == std::vector<SiteIndex>{{1, 1}, {2, 2}});
    CHECK(as_vector(sys.reversed({1, 1})) == std::vector<SiteIndex>{{1, 1}, {2, 2}});

    fwd[0] = {{3, 1}};
    CHECK_THROWS_AS(NeighborhoodSystem(2, 2, fwd), std::invalid_argument);
    CHECK_THROWS_AS(sys.forward({3, 1}), std::out_of_range);
}

TEST_CASE("neighborhood_stats reports exact order statistics") {
    const auto sys = build_neighborhoods(path_adjacency(3), 1, {NeighborhoodKind::spatial, 1});
    const auto st = neighborhood_stats(sys);
    CHECK(st.min == 2);
    CHECK(st.median == 2.0);
    CHECK(st.max == 3);

    const auto temporal = build_neighborhoods(path_adjacency(4), 100, {NeighborhoodKind::temporal, 6});
    CHECK(neighborhood_stats(temporal).median == 7.0);
    CHECK(neighborhood_stats(temporal).min == 1);
}

TEST_CASE("build_neighborhoods rejects bad preconditions") {
    CHECK_THROWS_AS(build_neighborhoods(path_adjacency(3), 0, {NeighborhoodKind::spatial, 1}), std::invalid_argument);
    CHECK_THROWS_AS(build_neighborhoods(path_adjacency(3), 4, {NeighborhoodKind::temporal, 0}), std::invalid_argument);
    CHECK_NOTHROW(build_neighborhoods(path_adjacency(3), 4, {NeighborhoodKind::spatial, 0}));
}
