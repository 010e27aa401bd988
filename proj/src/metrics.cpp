#include "physcad/metrics.hpp"

#include <cmath>
#include <numeric>

namespace physcad {

std::string to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Valid: return "valid";
    case RunStatus::Failed: return "failed";
    case RunStatus::IterationCap: return "iteration_cap";
    case RunStatus::Aborted: return "aborted";
    }
    return "failed";
}

namespace {

RunStatus run_status_from_string(const std::string& s)
{
    for (auto st : {RunStatus::Valid, RunStatus::Failed, RunStatus::IterationCap, RunStatus::Aborted})
        if (to_string(st) == s)
            return st;
    throw std::invalid_argument("unknown run status '" + s + "'");
}

template <class T>
nlohmann::json opt(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    return it->get<T>();
}

std::vector<RunRecord> completed(const std::vector<RunRecord>& runs)
{
    std::vector<RunRecord> out;
    for (const auto& r : runs)
        if (r.final_status != RunStatus::Aborted)
            out.push_back(r);
    return out;
}

double mean(const std::vector<double>& xs)
{
    return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

} // namespace

long RunRecord::input_tokens() const
{
    long s = 0;
    for (const auto& it : iterations)
        s += it.input_tokens;
    return s;
}

long RunRecord::output_tokens() const
{
    long s = 0;
    for (const auto& it : iterations)
        s += it.output_tokens;
    return s;
}

const IterationRecord* RunRecord::final_design() const
{
    for (auto it = iterations.rbegin(); it != iterations.rend(); ++it)
        if (it->fea_ok)
            return &*it;
    return nullptr;
}

nlohmann::json to_json(const IterationRecord& r)
{
    return {
        {"iteration_index", r.iteration_index},
        {"compile_ok", r.compile_ok},
        {"mesh_ok", r.mesh_ok},
        {"fea_ok", r.fea_ok},
        {"safety_factor", opt(r.safety_factor)},
        {"volume_mm3", opt(r.volume_mm3)},
        {"face_count", opt(r.face_count)},
        {"design_space_violated", r.design_space_violated},
        {"violation_ratio", r.violation_ratio},
        {"failure_category", r.failure_category == FailureCategory::None ? nlohmann::json(nullptr)
                                                                         : nlohmann::json(to_string(r.failure_category))},
        {"in_target_range", r.in_target_range},
        {"input_tokens", r.input_tokens},
        {"output_tokens", r.output_tokens},
        {"wall_seconds", r.wall_seconds},
    };
}

IterationRecord iteration_from_json(const nlohmann::json& j)
{
    IterationRecord r;
    r.iteration_index = j.at("iteration_index").get<int>();
    r.compile_ok = j.at("compile_ok").get<bool>();
    r.mesh_ok = j.at("mesh_ok").get<bool>();
    r.fea_ok = j.at("fea_ok").get<bool>();
    r.safety_factor = get_opt<double>(j, "safety_factor");
    r.volume_mm3 = get_opt<double>(j, "volume_mm3");
    r.face_count = get_opt<int>(j, "face_count");
    r.design_space_violated = j.value("design_space_violated", false);
    r.violation_ratio = j.value("violation_ratio", 0.0);
    if (auto c = get_opt<std::string>(j, "failure_category"))
        r.failure_category = failure_category_from_string(*c);
    r.in_target_range = j.value("in_target_range", false);
    r.input_tokens = j.value("input_tokens", 0L);
    r.output_tokens = j.value("output_tokens", 0L);
    r.wall_seconds = j.value("wall_seconds", 0.0);
    if (r.mesh_ok && !r.compile_ok)
        throw std::invalid_argument("iteration record: mesh_ok requires compile_ok");
    if (r.fea_ok && !r.mesh_ok)
        throw std::invalid_argument("iteration record: fea_ok requires mesh_ok");
    return r;
}

nlohmann::json to_json(const RunRecord& r)
{
    nlohmann::json its = nlohmann::json::array();
    for (const auto& it : r.iterations)
        its.push_back(to_json(it));
    nlohmann::json j{
        {"model_id", r.model_id},
        {"problem_id", r.problem_id},
        {"variant", r.variant},
        {"run_index", r.run_index},
        {"run_seed", r.run_seed},
        {"final_status", to_string(r.final_status)},
        {"final_category", r.final_category == FailureCategory::None ? nlohmann::json(nullptr)
                                                                     : nlohmann::json(to_string(r.final_category))},
        {"iterations_to_valid", opt(r.iterations_to_valid)},
        {"input_tokens", r.input_tokens()},
        {"output_tokens", r.output_tokens()},
        {"iterations", its},
    };
    if (!r.abort_reason.empty())
        j["abort_reason"] = r.abort_reason;
    return j;
}

RunRecord run_from_json(const nlohmann::json& j)
{
    RunRecord r;
    r.model_id = j.at("model_id").get<std::string>();
    r.problem_id = j.at("problem_id").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.run_index = j.value("run_index", 0);
    r.run_seed = j.value("run_seed", std::uint64_t{0});
    r.final_status = run_status_from_string(j.at("final_status").get<std::string>());
    if (auto c = get_opt<std::string>(j, "final_category"))
        r.final_category = failure_category_from_string(*c);
    r.iterations_to_valid = get_opt<int>(j, "iterations_to_valid");
    r.abort_reason = j.value("abort_reason", std::string{});
    for (const auto& it : j.at("iterations"))
        r.iterations.push_back(iteration_from_json(it));
    return r;
}

std::optional<MeanSd> mean_sd(const std::vector<double>& xs)
{
    if (xs.empty())
        return std::nullopt;
    MeanSd r;
    r.n = xs.size();
    r.mean = mean(xs);
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - r.mean) * (x - r.mean);
        r.sd = std::sqrt(ss / double(xs.size() - 1));
    }
    return r;
}

Reliability reliability(const std::vector<RunRecord>& runs)
{
    std::size_t n = 0, compiled = 0, meshed = 0, solved = 0;
    for (const auto& run : completed(runs))
        for (const auto& it : run.iterations) {
            ++n;
            compiled += it.compile_ok;
            meshed += it.mesh_ok;
            solved += it.fea_ok;
        }
    Reliability r;
    r.iterations = n;
    auto pct = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0)
            return std::nullopt;
        return 100.0 * double(num) / double(den);
    };
    r.r1 = pct(compiled, n);
    r.r2 = pct(meshed, compiled);
    r.r3 = pct(solved, meshed);
    r.mesh_unconditional = pct(meshed, n);
    r.fea_unconditional = pct(solved, n);
    return r;
}

DesignQuality design_quality(const std::vector<RunRecord>& runs)
{
    std::vector<double> sf, sfr, faces, violated, ratio;
    for (const auto& run : completed(runs)) {
        const IterationRecord* d = run.final_design();
        if (!d)
            continue;
        if (d->safety_factor) {
            sf.push_back(*d->safety_factor);
            if (d->volume_mm3 && *d->volume_mm3 > 0.0)
                sfr.push_back(*d->safety_factor / (*d->volume_mm3 / 1000.0));
        }
        if (d->face_count)
            faces.push_back(double(*d->face_count));
        violated.push_back(d->design_space_violated ? 100.0 : 0.0);
        ratio.push_back(100.0 * d->violation_ratio);
    }
    DesignQuality q;
    q.designs = violated.size();
    q.dq1_safety_factor = mean_sd(sf);
    if (!sfr.empty())
        q.dq2_sf_per_cm3 = mean(sfr);
    if (!faces.empty())
        q.dq3_face_count = mean(faces);
    if (!violated.empty())
        q.dq4_violation_pct = mean(violated);
    q.dq5_violation_ratio_pct = mean_sd(ratio);
    return q;
}

ProcessEfficiency process_efficiency(const std::vector<RunRecord>& runs)
{
    ProcessEfficiency p;
    std::vector<double> its;
    for (const auto& run : completed(runs)) {
        ++p.runs;
        if (run.final_status == RunStatus::Valid && run.iterations_to_valid)
            its.push_back(double(*run.iterations_to_valid));
    }
    p.successes = its.size();
    if (!its.empty())
        p.pe1 = mean(its);
    if (p.runs > 0)
        p.failure_rate_pct = 100.0 * double(p.runs - p.successes) / double(p.runs);
    return p;
}

std::map<FailureCategory, std::size_t> failure_histogram(const std::vector<RunRecord>& runs)
{
    std::map<FailureCategory, std::size_t> h;
    for (const auto& run : completed(runs))
        if (run.final_status != RunStatus::Valid)
            ++h[run.final_category == FailureCategory::None ? FailureCategory::IterationCap : run.final_category];
    return h;
}

} // namespace physcad
