#pragma once

#include "physcad/agent/backend.hpp"
#include "physcad/loadcase.hpp"
#include "physcad/metrics.hpp"
#include "physcad/render.hpp"
#include "physcad/validators.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace physcad::agent {

struct Feedback {
    AgentRole source;
    std::string text;
};

struct TranscriptEntry {
    int iteration = 0;
    AgentRole role = AgentRole::Engineer;
    std::string prompt;   ///< text parts of the request
    std::size_t images = 0;
    std::string response;
    long input_tokens = 0;
    long output_tokens = 0;
};

nlohmann::json to_json(const TranscriptEntry& e);

/// Shared state of one run. Each run starts from a fresh state, so nothing
/// from an earlier run can reach its prompts.
struct DesignState {
    LoadCase load_case;
    std::string plan;
    std::string program_source;
    std::optional<GeometryProgram> geometry;
    std::optional<ValidationReport> validation;
    int iteration = 0;
    std::vector<Feedback> engineer_feedback; ///< drained into the next Engineer prompt
    std::vector<Feedback> planner_feedback;  ///< drained into the next Planner prompt
    std::vector<TranscriptEntry> transcript;
};

/// Everything produced in one iteration, for persistence.
struct IterationArtifacts {
    int iteration = 0;
    std::string program_source;
    const Evaluation* evaluation = nullptr; ///< null when compilation failed
    std::vector<std::pair<ViewDirection, Image>> views;
};

struct PipelineConfig {
    std::string model_id = "mock";
    int max_iterations = 10;
    ValidationOptions validation;
    double temperature = 0.5;
    int max_output_tokens = 4096;
    bool thinking = false;
    /// When false FEA still runs for the metrics but never reaches a prompt,
    /// and the Structural Reviewer decides acceptance from the geometry.
    bool fea_feedback = true;
    /// Consecutive geometry-review failures on one plan before a replan.
    int geometry_failures_before_replan = 2;
    int hotspot_count = 5;
    int render_size = 512;
    bool attach_images = true;
    /// Wall-clock seconds per iteration. Off by default so records from the
    /// deterministic backends are reproducible byte for byte.
    bool record_timing = false;
    std::function<void(const IterationArtifacts&)> on_iteration;
};

struct RunIdentity {
    std::string variant = "g1_f1";
    int run_index = 0;
    std::uint64_t seed = 0;
};

struct RunOutcome {
    RunRecord record;
    DesignState state;
};

/// First balanced {...} substring that parses as JSON, skipping candidates
/// that do not.
std::optional<std::string> extract_json_object(std::string_view text);

/// Parses "VERDICT: <word>" from the last line that carries one, upper-cased.
std::optional<std::string> parse_verdict(std::string_view text);

/// Planner -> Engineer -> compile and checks -> Geometry Reviewer -> FEA ->
/// Structural Reviewer, until a design passes every check with the safety
/// factor in range or the iteration cap is reached. Routing:
///   - extraction or compile failure: Engineer
///   - failed deterministic geometry check: Engineer; after
///     `geometry_failures_before_replan` in a row on one plan, Planner
///   - FEA failure: Engineer
///   - safety factor out of range: Planner
/// A transport failure ends the run with status Aborted.
RunOutcome run_pipeline(const LoadCase& c, AgentBackend& backend, const PipelineConfig& cfg, const RunIdentity& id);

/// One Engineer role only, fed the raw check and solver output. Without FEA
/// feedback the run stops at the first design that passes every check.
RunOutcome single_agent_pipeline(const LoadCase& c, AgentBackend& backend, const PipelineConfig& cfg,
                                 const RunIdentity& id);

/// The bisection designer in place of language models. No tokens are spent.
RunOutcome run_heuristic(const LoadCase& c, const PipelineConfig& cfg, const RunIdentity& id);

/// Feedback text sent after FEA: safety factor, target range, volume and the
/// stress hotspots, ending with a "SAFETY_FACTOR: <value>" line.
std::string structural_report(const Evaluation& ev, const ValidationOptions& opts, int hotspots);

/// Human-readable summary of the deterministic checks for the Geometry Reviewer.
std::string checks_summary(const ValidationReport& r, const LoadCase& c);

} // namespace physcad::agent
