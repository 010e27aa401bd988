#pragma once

#include "physcad/fem.hpp"
#include "physcad/validators.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace physcad::bench {

struct BenchConfig {
    std::string cases = "builtin"; ///< "builtin", a directory of case files, or one file
    std::vector<std::string> case_ids; ///< optional filter by problem_id
    std::string backend = "heuristic"; ///< heuristic | mock | remote
    std::string provider = "generic";  ///< remote only: generic | anthropic | openai
    std::string model;                 ///< defaults to the backend name
    std::string endpoint;
    std::string api_key_env;
    std::string mock_script;
    int runs = 3;
    int max_iterations = 10;
    int resolution = 48;
    Material material;
    SafetyRange sf_range;
    std::vector<double> geom_scales{0.5, 0.75, 1.0, 1.5, 2.0};
    std::vector<double> force_scales{0.5, 0.75, 1.0, 1.5, 2.0};
    std::string out = "bench_out";
    int parallel = 1;
    std::uint64_t seed = 0;
    bool fea_feedback = true;
    bool single_agent = false;
    bool save_artifacts = true;
    int render_size = 512;

    std::string model_id() const { return model.empty() ? backend : model; }
    /// Throws std::invalid_argument on the first bad field.
    void validate() const;
};

/// Same keys as the member names; missing keys keep their defaults and
/// unknown keys are rejected so typos do not pass silently.
BenchConfig config_from_json(const nlohmann::json& j, BenchConfig base = {});
nlohmann::json to_json(const BenchConfig& c);

} // namespace physcad::bench
