#pragma once

#include "physcad/loadcase.hpp"
#include "physcad/validators.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace physcad {

struct IterationRecord {
    int iteration_index = 0; ///< 1-based
    bool compile_ok = false;
    bool mesh_ok = false;
    bool fea_ok = false;
    std::optional<double> safety_factor;
    std::optional<double> volume_mm3;
    std::optional<int> face_count;
    bool design_space_violated = false;
    double violation_ratio = 0.0;
    FailureCategory failure_category = FailureCategory::None;
    bool in_target_range = false;
    long input_tokens = 0;
    long output_tokens = 0;
    double wall_seconds = 0.0;
};

enum class RunStatus { Valid, Failed, IterationCap, Aborted };

std::string to_string(RunStatus s);

struct RunRecord {
    std::string model_id;
    std::string problem_id;
    std::string variant; ///< VariantSpec::key()
    int run_index = 0;
    std::uint64_t run_seed = 0;
    std::vector<IterationRecord> iterations;
    RunStatus final_status = RunStatus::IterationCap;
    /// Category of the last iteration when the run did not end valid
    /// (IterationCap when every check passed but the safety factor missed).
    FailureCategory final_category = FailureCategory::None;
    std::optional<int> iterations_to_valid;
    std::string abort_reason; ///< transport failure text, Aborted runs only

    long input_tokens() const;
    long output_tokens() const;
    /// Last iteration that reached a successful FEA solve, if any.
    const IterationRecord* final_design() const;
};

nlohmann::json to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunRecord& r);
RunRecord run_from_json(const nlohmann::json& j);

struct MeanSd {
    double mean = 0.0;
    std::optional<double> sd; ///< sample sd; absent for n < 2
    std::size_t n = 0;
};

std::optional<MeanSd> mean_sd(const std::vector<double>& xs);

/// Stage pass rates in percent. Aborted runs are excluded. Conditional rates
/// are absent when their denominator is zero.
struct Reliability {
    std::size_t iterations = 0;
    std::optional<double> r1;       ///< compile_ok / iterations
    std::optional<double> r2;       ///< mesh_ok / compile_ok
    std::optional<double> r3;       ///< fea_ok / mesh_ok
    std::optional<double> mesh_unconditional; ///< mesh_ok / iterations
    std::optional<double> fea_unconditional;  ///< fea_ok / iterations
};

Reliability reliability(const std::vector<RunRecord>& runs);

/// Statistics over the final design of each run that reached FEA.
struct DesignQuality {
    std::size_t designs = 0;
    std::optional<MeanSd> dq1_safety_factor;
    std::optional<double> dq2_sf_per_cm3;
    std::optional<double> dq3_face_count;
    std::optional<double> dq4_violation_pct;
    std::optional<MeanSd> dq5_violation_ratio_pct;
};

DesignQuality design_quality(const std::vector<RunRecord>& runs);

struct ProcessEfficiency {
    std::size_t runs = 0;
    std::size_t successes = 0;
    std::optional<double> pe1;
    std::optional<double> failure_rate_pct;
};

ProcessEfficiency process_efficiency(const std::vector<RunRecord>& runs);

/// Count of non-valid, non-aborted runs per final category.
std::map<FailureCategory, std::size_t> failure_histogram(const std::vector<RunRecord>& runs);

} // namespace physcad
