#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stvc/evaluation.hpp"
#include "stvc/graph.hpp"
#include "stvc/regression.hpp"

namespace stvc {

using nlohmann::json;

enum class ResponseMode {
    /// Columns: unit, time, y, x1..xp.
    direct,
    /// Columns: unit, time, count, population, x1..xp; y = log(count / population).
    log_rate,
};

struct IngestionSpec {
    ResponseMode response = ResponseMode::direct;
    /// Per-covariate log transform flags; missing entries mean no transform.
    std::vector<bool> log_covariates;
};

/// Assembles a complete panel from CSV text with a header row. Unit and time
/// labels are mapped to dense 1-based indices in sorted order (numeric order
/// when every label is a number).
PanelData load_panel(std::string_view csv, const IngestionSpec& spec = {});
PanelData read_panel_file(const std::filesystem::path& path, const IngestionSpec& spec = {});
/// Writes a direct-response panel: unit,time,y,x1..xp.
std::string panel_to_csv(const PanelData& data);

/// Settings for `simulate`.
struct SimulationSpec {
    int n = 5;
    int T = 20;
    int p = 1;
    double alpha = 1.0;
    /// One precision per unit, or a single broadcast value.
    std::vector<double> tau{100.0};
    /// Draw beta from the STN prior ("stn") or hold it fixed ("constant").
    std::string beta_mode = "stn";
    double beta_value = 0.5;
    /// Optional panel whose covariates are reused instead of drawing N(0, 1).
    std::optional<std::filesystem::path> covariates_from;
};

struct RunConfig {
    std::string dataset = "data";
    std::filesystem::path data;
    std::optional<std::filesystem::path> adjacency;
    IngestionSpec ingestion;
    NeighborhoodConfig neighborhood{NeighborhoodKind::temporal, 3};
    Hyperparams hyper;
    ChainConfig chain;
    ModelTag model = ModelTag::STVC;
    std::filesystem::path out = "out";
    double level = 0.95;
    SimulationSpec simulation;

    void validate() const;
};

/// Missing keys take the defaults above. Relative paths resolve against
/// `base_dir`.
RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
RunConfig read_run_config(const std::filesystem::path& path);
json to_json(const RunConfig& cfg);

/// Neighborhood system for a config: adjacency from file when given,
/// otherwise n isolated units (temporal neighborhoods only).
NeighborhoodSystem neighborhoods_for(const RunConfig& cfg, int n, int T);

/// Long-format chain CSV. '#'-prefixed metadata lines (model tag,
/// dimensions, schedule, generator, optional run config) precede the header
/// "iter,block,unit,time,k,value". Indices are 1-based and empty when unused.
std::string chain_to_csv(const Chain& chain, const json& run_config = nullptr);
Chain chain_from_csv(std::string_view text);
void persist_chain(const Chain& chain, const std::filesystem::path& path, const json& run_config = nullptr);
Chain load_chain(const std::filesystem::path& path);

json to_json(const FitReport& report, const RunConfig& cfg, const PanelData& data);
FitReport report_from_json(const json& j);
std::string summaries_to_csv(const std::vector<ParameterSummary>& summaries);
std::string ranking_to_csv(const std::vector<RankingRow>& rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace stvc
