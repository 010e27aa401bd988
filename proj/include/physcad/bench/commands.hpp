#pragma once

#include "physcad/agent/backend.hpp"
#include "physcad/bench/config.hpp"
#include "physcad/loadcase.hpp"
#include "physcad/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace physcad::bench {

struct GenCasesResult {
    std::vector<std::filesystem::path> case_files;
    std::filesystem::path manifest;
    std::size_t configurations = 0;
};

/// Writes one `<problem_id>.json` per built-in case plus `manifest.json`
/// listing every (case, variant) configuration. Output is deterministic.
GenCasesResult cmd_gen_cases(const std::filesystem::path& out_dir,
                             const std::vector<double>& geom_scales = {kDefaultGeomScales.begin(),
                                                                       kDefaultGeomScales.end()},
                             const std::vector<double>& force_scales = {kDefaultForceScales.begin(),
                                                                        kDefaultForceScales.end()});

/// "builtin", a single case file, or a directory of `*.json` case files
/// (a `manifest.json` there is skipped). Sorted by problem_id.
std::vector<LoadCase> load_cases(const std::string& spec);

/// FNV-1a over model, case, variant and run, mixed with the base seed.
std::uint64_t run_seed(std::uint64_t base, const std::string& model, const std::string& problem_id,
                       const std::string& variant, int run_index);

/// Identity of a record in the results file, used for resume.
std::string record_key(const std::string& model, const std::string& problem_id, const std::string& variant,
                       int run_index);

/// Creates a fresh backend for one run. Null for the heuristic designer.
using BackendFactory = std::function<std::unique_ptr<agent::AgentBackend>()>;

/// Factory matching the config's backend field.
BackendFactory make_backend_factory(const BenchConfig& cfg);

struct RunSummary {
    std::size_t scheduled = 0;
    std::size_t skipped = 0; ///< already present in the results file
    std::size_t executed = 0;
    std::size_t valid = 0;
    std::size_t aborted = 0;
    std::filesystem::path results;
};

/// Runs every selected (case, variant, run) tuple not already recorded in
/// `<out>/results.jsonl`, appending one line per finished run. Aborted runs
/// are recorded but retried on the next invocation. `factory` overrides the
/// config's backend when set.
RunSummary cmd_run(const BenchConfig& cfg, BackendFactory factory = {});

/// Every record in a JSONL results file, in file order. Blank lines are skipped.
std::vector<RunRecord> read_results(const std::filesystem::path& path);

} // namespace physcad::bench
