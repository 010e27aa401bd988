#pragma once

#include "physcad/metrics.hpp"
#include "physcad/stats.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace physcad::bench {

struct EmptyResults : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelReport {
    std::string model_id;
    std::size_t records = 0;
    std::size_t aborted = 0;
    Reliability reliability;
    DesignQuality quality;
    ProcessEfficiency efficiency;
    std::map<FailureCategory, std::size_t> histogram;
};

/// One entry per model_id, sorted by id. Throws EmptyResults when empty.
std::vector<ModelReport> build_report(const std::vector<RunRecord>& records);

nlohmann::json to_json(const ModelReport& m);
nlohmann::json report_json(const std::vector<ModelReport>& models);
std::string report_text(const std::vector<ModelReport>& models);

struct Report {
    std::vector<ModelReport> models;
    std::string text;
    nlohmann::json json;
};

Report cmd_report(const std::filesystem::path& results);

struct GroupSummary {
    std::string label;
    std::size_t runs = 0; ///< aborted runs excluded
    std::size_t successes = 0;
    std::vector<double> iterations_to_valid;
    std::vector<double> compile_ok;   ///< one 0/1 value per iteration
    std::vector<double> fea_ok;       ///< one 0/1 value per iteration
};

GroupSummary summarize_group(std::string label, const std::vector<RunRecord>& records);

struct FisherResult {
    std::array<std::array<long, 2>, 2> table{};
    double p_two_sided = 1.0;
    double p_greater = 1.0; ///< first group more successful
};

struct StatsReport {
    std::vector<GroupSummary> groups;
    std::optional<FisherResult> fisher;          ///< exactly two groups
    std::optional<stats::TTest> welch;           ///< exactly two groups with enough data
    std::optional<stats::KruskalWallis> kw_compile;
    std::optional<stats::KruskalWallis> kw_fea;
    std::vector<std::string> notes;              ///< tests skipped for lack of data
};

/// Two groups: Fisher exact on valid-run counts and Welch t on
/// iterations-to-valid. Three or more: Kruskal-Wallis on the per-iteration
/// compile and FEA success indicators.
StatsReport compare_groups(const std::vector<GroupSummary>& groups);

/// Each file is one group labelled by its stem. A single file is split by model_id.
StatsReport cmd_stats(const std::vector<std::filesystem::path>& files);

nlohmann::json to_json(const StatsReport& s);
std::string stats_text(const StatsReport& s);

} // namespace physcad::bench
