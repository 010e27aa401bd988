#include "physcad/bench/config.hpp"

#include <set>
#include <stdexcept>

namespace physcad::bench {

void BenchConfig::validate() const
{
    if (runs < 1)
        throw std::invalid_argument("runs must be at least 1");
    if (max_iterations < 1)
        throw std::invalid_argument("max_iterations must be at least 1");
    if (resolution < 8)
        throw std::invalid_argument("resolution must be at least 8");
    if (parallel < 1)
        throw std::invalid_argument("parallel must be at least 1");
    if (render_size < 64)
        throw std::invalid_argument("render_size must be at least 64");
    if (!(sf_range.lo > 0.0 && sf_range.lo <= sf_range.hi))
        throw std::invalid_argument("sf_range must satisfy 0 < lo <= hi");
    if (geom_scales.empty() || force_scales.empty())
        throw std::invalid_argument("scale lists must be non-empty");
    for (double s : geom_scales)
        if (!(s > 0.0))
            throw std::invalid_argument("geometric scales must be positive");
    for (double s : force_scales)
        if (!(s > 0.0))
            throw std::invalid_argument("force scales must be positive");
    if (backend != "heuristic" && backend != "mock" && backend != "remote")
        throw std::invalid_argument("backend must be heuristic, mock or remote");
    if (backend == "mock" && mock_script.empty())
        throw std::invalid_argument("the mock backend needs mock_script");
    if (backend == "remote" && (endpoint.empty() || model.empty()))
        throw std::invalid_argument("the remote backend needs endpoint and model");
    material.validate();
}

BenchConfig config_from_json(const nlohmann::json& j, BenchConfig c)
{
    static const std::set<std::string> known{
        "cases",  "case_ids",       "backend",   "provider",      "model",        "endpoint",     "api_key_env",
        "mock_script", "runs",      "max_iterations", "resolution", "material",   "sf_range",     "geom_scales",
        "force_scales", "out",      "parallel",  "seed",          "fea_feedback", "single_agent", "save_artifacts",
        "render_size"};
    if (!j.is_object())
        throw std::invalid_argument("config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k))
            throw std::invalid_argument("unknown config key '" + k + "'");

    auto get = [&](const char* key, auto& field) {
        if (auto it = j.find(key); it != j.end())
            field = it->get<std::decay_t<decltype(field)>>();
    };
    get("cases", c.cases);
    get("case_ids", c.case_ids);
    get("backend", c.backend);
    get("provider", c.provider);
    get("model", c.model);
    get("endpoint", c.endpoint);
    get("api_key_env", c.api_key_env);
    get("mock_script", c.mock_script);
    get("runs", c.runs);
    get("max_iterations", c.max_iterations);
    get("resolution", c.resolution);
    get("geom_scales", c.geom_scales);
    get("force_scales", c.force_scales);
    get("out", c.out);
    get("parallel", c.parallel);
    get("seed", c.seed);
    get("fea_feedback", c.fea_feedback);
    get("single_agent", c.single_agent);
    get("save_artifacts", c.save_artifacts);
    get("render_size", c.render_size);
    if (auto it = j.find("material"); it != j.end()) {
        c.material.youngs_modulus = it->value("youngs_modulus", c.material.youngs_modulus);
        c.material.poisson_ratio = it->value("poisson_ratio", c.material.poisson_ratio);
        c.material.yield_strength = it->value("yield_strength", c.material.yield_strength);
    }
    if (auto it = j.find("sf_range"); it != j.end()) {
        if (!it->is_array() || it->size() != 2)
            throw std::invalid_argument("sf_range must be [lo, hi]");
        c.sf_range = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    return c;
}

nlohmann::json to_json(const BenchConfig& c)
{
    return {{"cases", c.cases},
            {"case_ids", c.case_ids},
            {"backend", c.backend},
            {"provider", c.provider},
            {"model", c.model},
            {"endpoint", c.endpoint},
            {"api_key_env", c.api_key_env},
            {"mock_script", c.mock_script},
            {"runs", c.runs},
            {"max_iterations", c.max_iterations},
            {"resolution", c.resolution},
            {"material",
             {{"youngs_modulus", c.material.youngs_modulus},
              {"poisson_ratio", c.material.poisson_ratio},
              {"yield_strength", c.material.yield_strength}}},
            {"sf_range", {c.sf_range.lo, c.sf_range.hi}},
            {"geom_scales", c.geom_scales},
            {"force_scales", c.force_scales},
            {"out", c.out},
            {"parallel", c.parallel},
            {"seed", c.seed},
            {"fea_feedback", c.fea_feedback},
            {"single_agent", c.single_agent},
            {"save_artifacts", c.save_artifacts},
            {"render_size", c.render_size}};
}

} // namespace physcad::bench
