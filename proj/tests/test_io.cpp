#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "stvc/cli.hpp"
#include "stvc/io.hpp"

using namespace stvc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("stvc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::vector<std::string>& args, std::string* captured = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_dispatch(args, out, err);
    if (captured) *captured = out.str() + err.str();
    return code;
}

Chain random_chain(ModelTag tag, int n, int T, int p, int R, bool keep_gamma, std::uint64_t seed) {
    Rng rng(seed);
    Chain c;
    c.model_tag = tag;
    c.n = n;
    c.T = T;
    c.p = p;
    c.config.iterations = 10 + R;
    c.config.burn_in = 10;
    c.config.thin = 1;
    c.config.seed = seed;
    c.config.keep_gamma = keep_gamma;
    const std::size_t cells = tag == ModelTag::STVC ? static_cast<std::size_t>(n) * T * p
                              : tag == ModelTag::Model0 ? static_cast<std::size_t>(n) * p
                                                        : static_cast<std::size_t>(p);
    for (int r = 0; r < R; ++r) {
        Draw d;
        d.iteration = 11 + r;
        d.alpha = rng.standard_normal() * 1e-7;
        for (std::size_t j = 0; j < cells; ++j) d.beta.push_back(rng.normal(0.0, 1e-4) / 3.0);
        if (tag == ModelTag::STVC) {
            if (keep_gamma) for (std::size_t j = 0; j < cells; ++j) d.gamma.push_back(rng.standard_normal());
            for (int k = 0; k < p; ++k) d.omega.push_back(rng.standard_normal());
        }
        const int taus = tag == ModelTag::Model00 ? 1 : n;
        for (int i = 0; i < taus; ++i) d.tau.push_back(rng.gamma(2.0, 0.003));
        c.samples.push_back(std::move(d));
    }
    return c;
}

void write_config(const fs::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2)); }

}  // namespace

TEST_CASE("minimal panel") {
    const auto d = load_panel("unit,time,y,x1\n1,1,1.0,1.0\n1,2,1.0,1.0\n2,1,1.0,1.0\n2,2,1.0,1.0\n");
    CHECK(d.n == 2);
    CHECK(d.T == 2);
    CHECK(d.p == 1);
    CHECK(d.y == std::vector<double>(4, 1.0));
}

TEST_CASE("labels map to dense indices in numeric order") {
    const auto d = load_panel("unit,time,y,x1,x2\n10,2001,4,0,1\n9,2001,3,0,1\n10,2000,2,0,1\n9,2000,1,0,1\n");
    CHECK(d.unit_labels == std::vector<std::string>{"9", "10"});
    CHECK(d.time_labels == std::vector<std::string>{"2000", "2001"});
    CHECK(d.y == std::vector<double>{1, 3, 2, 4});
    CHECK(d.p == 2);
}

TEST_CASE("log-rate response") {
    IngestionSpec spec;
    spec.response = ResponseMode::log_rate;
    spec.log_covariates = {true};
    const auto d = load_panel("unit,time,count,population,x1\n1,1,100,10000,2.718281828459045\n", spec);
    CHECK(d.y[0] == doctest::Approx(-4.60517).epsilon(1e-6));
    CHECK(d.x[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(load_panel("unit,time,count,population,x1\n1,1,0,10000,1\n", spec), std::invalid_argument);
}

TEST_CASE("panel errors") {
    CHECK_THROWS_WITH_AS(load_panel("unit,time,y,x1\n1,1,1,1\n1,2,1,1\n2,1,1,1\n"),
                         doctest::Contains("(2,2)"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(load_panel("unit,time,y,x1\n1,1,abc,1\n"), doctest::Contains("non-numeric"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(load_panel("unit,time,y,x1\n1,1,1,1\n1,1,2,1\n"), doctest::Contains("duplicate"),
                         std::invalid_argument);
    CHECK_THROWS_AS(load_panel(""), std::invalid_argument);
}

TEST_CASE("panel round trip through CSV") {
    const auto d = load_panel("unit,time,y,x1,x2\nA,t1,0.1,3,4\nA,t2,-2.5e-9,5,6\n");
    const auto back = load_panel(panel_to_csv(d));
    CHECK(back.y == d.y);
    CHECK(back.x == d.x);
    CHECK(back.unit_labels == d.unit_labels);
    CHECK(back.time_labels == d.time_labels);
}

TEST_CASE("chain files round trip exactly") {
    for (const auto tag : {ModelTag::STVC, ModelTag::Model0, ModelTag::Model00}) {
        for (const bool keep : {false, true}) {
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                CAPTURE(to_string(tag));
                auto chain = random_chain(tag, 3, 4, 2, 6, keep, seed);
                if (seed == 2) {
                    chain.config.rng_mode = RngMode::per_unit;
                    chain.config.unit_keys = {5, 6, 7};
                }
                const auto back = chain_from_csv(chain_to_csv(chain, {{"dataset", "demo"}}));
                CHECK(back.model_tag == chain.model_tag);
                CHECK(back.n == chain.n);
                CHECK(back.T == chain.T);
                CHECK(back.p == chain.p);
                CHECK(back.config.iterations == chain.config.iterations);
                CHECK(back.config.burn_in == chain.config.burn_in);
                CHECK(back.config.thin == chain.config.thin);
                CHECK(back.config.seed == chain.config.seed);
                CHECK(back.config.keep_gamma == chain.config.keep_gamma);
                CHECK(back.config.rng_mode == chain.config.rng_mode);
                CHECK(back.config.unit_keys == chain.config.unit_keys);
                CHECK(back.samples == chain.samples);
            }
        }
    }
    const auto dir = scratch("chain");
    const auto chain = random_chain(ModelTag::STVC, 2, 2, 1, 3, false, 4);
    persist_chain(chain, dir / "nested" / "chain.csv");
    CHECK(load_chain(dir / "nested" / "chain.csv").samples == chain.samples);

    CHECK_THROWS_AS(chain_from_csv("iter,block,unit,time,k,value\n1,alpha,,,,1\n"), std::invalid_argument);
}

TEST_CASE("chain rows follow the long-format schema") {
    const auto text = chain_to_csv(random_chain(ModelTag::STVC, 2, 3, 1, 2, false, 9));
    CHECK(text.find("\niter,block,unit,time,k,value\n") != std::string::npos);
    CHECK(text.find("\n11,alpha,,,,") != std::string::npos);
    CHECK(text.find("\n11,tau,2,,,") != std::string::npos);
    CHECK(text.find("\n11,omega,,,1,") != std::string::npos);
    CHECK(text.find("\n11,beta,2,3,1,") != std::string::npos);
    CHECK(text.find(",gamma,") == std::string::npos);
}

TEST_CASE("row count for the full schedule at state scale") {
    // 500 draws with n = 32, T = 60, p = 3: one alpha, 5760 betas, 32 taus, 3 omegas each.
    const auto text = chain_to_csv(random_chain(ModelTag::STVC, 32, 60, 3, 500, false, 1));
    std::size_t rows = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        const auto line = text.substr(pos, end - pos);
        if (header_seen) ++rows;
        if (line.rfind("iter,", 0) == 0) header_seen = true;
        pos = end + 1;
    }
    CHECK(rows == 500u * (1 + 5760 + 32 + 3));
}

TEST_CASE("run configuration parsing") {
    const auto dir = scratch("config");
    const auto cfg = run_config_from_json(
        nlohmann::json::parse(R"({
            "dataset": "gastro",
            "data": "panel.csv",
            "adjacency": "/abs/graph.adj",
            "neighborhood": {"kind": "s+t", "q": 6},
            "hyper": {"c": 50, "c0": 0.5},
            "chain": {"iterations": 100, "burn_in": 20, "thin": 4, "seed": 3},
            "model": "STVC",
            "level": 0.9
        })"),
        dir);
    CHECK(cfg.dataset == "gastro");
    CHECK(cfg.data == dir / "panel.csv");
    CHECK(*cfg.adjacency == fs::path("/abs/graph.adj"));
    CHECK(cfg.neighborhood.kind == NeighborhoodKind::union_);
    CHECK(cfg.neighborhood.q == 6);
    CHECK(cfg.hyper.c == std::vector<double>{50.0});
    CHECK(cfg.hyper.c0 == 0.5);
    CHECK(cfg.hyper.m_alpha == 0.0);
    CHECK(cfg.hyper.c_alpha == 0.01);
    CHECK(cfg.hyper.a0 == 0.01);
    CHECK(cfg.chain.retained() == 20);
    CHECK(cfg.level == 0.9);

    const RunConfig defaults;
    CHECK(defaults.chain.iterations == 22500);
    CHECK(defaults.chain.burn_in == 10000);
    CHECK(defaults.chain.thin == 25);
    CHECK(defaults.hyper.c == std::vector<double>{50.0});
    CHECK(defaults.level == 0.95);

    const auto again = run_config_from_json(to_json(cfg));
    CHECK(to_json(again) == to_json(cfg));

    CHECK_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"iterations": 5})")), std::invalid_argument);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"neighborhood": {"kind": "diag"}})")),
                    std::invalid_argument);
}

TEST_CASE("simulate with a fixed seed writes identical files") {
    const auto dir = scratch("simulate");
    REQUIRE(run({"simulate", "--seed", "7", "--out", (dir / "a").string()}) == 0);
    REQUIRE(run({"simulate", "--seed", "7", "--out", (dir / "b").string()}) == 0);
    CHECK(read_text_file(dir / "a" / "panel.csv") == read_text_file(dir / "b" / "panel.csv"));
    CHECK(read_text_file(dir / "a" / "truth.json") == read_text_file(dir / "b" / "truth.json"));
    REQUIRE(run({"simulate", "--seed", "8", "--out", (dir / "c").string()}) == 0);
    CHECK(read_text_file(dir / "a" / "panel.csv") != read_text_file(dir / "c" / "panel.csv"));
}

TEST_CASE("fit, summarize and compare from the command line") {
    const auto dir = scratch("fit");
    REQUIRE(run({"simulate", "--seed", "3", "--out", dir.string()}) == 0);

    auto base = nlohmann::json{{"dataset", "sim"},
                               {"data", (dir / "panel.csv").string()},
                               {"neighborhood", {{"kind", "t"}, {"q", 2}}},
                               {"chain", {{"iterations", 300}, {"burn_in", 100}, {"thin", 4}, {"seed", 5}}}};
    write_config(dir / "stvc.json", base);
    auto ref = base;
    ref["model"] = "Model00";
    write_config(dir / "m00.json", ref);

    std::string text;
    REQUIRE(run({"fit", "--config", (dir / "stvc.json").string(), "--out", (dir / "stvc").string()}, &text) == 0);
    CHECK(text.find("retained samples: 50") != std::string::npos);
    CHECK(text.find("LPML: ") != std::string::npos);
    REQUIRE(run({"fit", "--config", (dir / "m00.json").string(), "--out", (dir / "m00").string()}) == 0);

    const auto report = nlohmann::json::parse(read_text_file(dir / "stvc" / "report.json"));
    CHECK(report.contains("lpml"));
    CHECK(report["model_tag"] == "STVC");
    CHECK(report["neighborhood"]["kind"] == "t");
    CHECK(report["neighborhood"]["q"] == 2);
    CHECK(report["neighborhood"]["median_size"] == 3.0);
    CHECK(report["seed"] == 5);
    CHECK(report.contains("generator"));
    CHECK(report["config"]["chain"]["iterations"] == 300);
    CHECK(report["summaries"].size() > 0);
    CHECK(load_chain(dir / "stvc" / "chain.csv").samples.size() == 50);

    REQUIRE(run({"summarize", "--config", (dir / "stvc.json").string(), "--chain",
                 (dir / "stvc" / "chain.csv").string(), "--out", (dir / "again").string()}) == 0);
    const auto recomputed = nlohmann::json::parse(read_text_file(dir / "again" / "report.json"));
    CHECK(recomputed["lpml"].get<double>() == report["lpml"].get<double>());
    CHECK(read_text_file(dir / "again" / "summary.csv") == read_text_file(dir / "stvc" / "summary.csv"));

    REQUIRE(run({"compare", (dir / "m00" / "report.json").string(), (dir / "stvc" / "report.json").string(), "--out",
                 (dir / "rank").string()}) == 0);
    const auto ranking = read_text_file(dir / "rank" / "ranking.csv");
    CHECK(ranking.find("lpml") != std::string::npos);
    CHECK(fs::exists(dir / "rank" / "ranking.json"));
}

TEST_CASE("command line errors give nonzero exit codes") {
    CHECK(run({"fit"}) != 0);
    CHECK(run({"bogus"}) != 0);
    CHECK(run({"simulate", "--unknown-flag"}) != 0);
    const auto dir = scratch("errors");
    write_config(dir / "bad.json", {{"data", (dir / "missing.csv").string()}});
    CHECK(run({"fit", "--config", (dir / "bad.json").string()}) != 0);
    write_config(dir / "typo.json", {{"chian", {}}});
    CHECK(run({"fit", "--config", (dir / "typo.json").string()}) != 0);
}
