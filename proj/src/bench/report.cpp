#include "physcad/bench/report.hpp"

#include "physcad/bench/commands.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace physcad::bench {

namespace {

nlohmann::json opt(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json opt(const std::optional<MeanSd>& v)
{
    if (!v)
        return nullptr;
    return {{"mean", v->mean}, {"sd", opt(v->sd)}, {"n", v->n}};
}

std::string pct(const std::optional<double>& v)
{
    return v ? fmt::format("{:.1f}%", *v) : "n/a";
}

std::string num(const std::optional<double>& v, int digits = 2)
{
    return v ? fmt::format("{:.{}f}", *v, digits) : "n/a";
}

std::string mean_sd_text(const std::optional<MeanSd>& v, int digits = 2)
{
    if (!v)
        return "n/a";
    if (!v->sd)
        return fmt::format("{:.{}f}", v->mean, digits);
    return fmt::format("{:.{}f} ± {:.{}f}", v->mean, digits, *v->sd, digits);
}

bool has_variance(const std::vector<double>& xs)
{
    return std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs.front(); });
}

} // namespace

std::vector<ModelReport> build_report(const std::vector<RunRecord>& records)
{
    if (records.empty())
        throw EmptyResults("no run records");
    std::map<std::string, std::vector<RunRecord>> by_model;
    for (const auto& r : records)
        by_model[r.model_id].push_back(r);
    std::vector<ModelReport> out;
    for (const auto& [id, runs] : by_model) {
        ModelReport m;
        m.model_id = id;
        m.records = runs.size();
        m.aborted = static_cast<std::size_t>(std::count_if(
            runs.begin(), runs.end(), [](const RunRecord& r) { return r.final_status == RunStatus::Aborted; }));
        m.reliability = reliability(runs);
        m.quality = design_quality(runs);
        m.efficiency = process_efficiency(runs);
        m.histogram = failure_histogram(runs);
        out.push_back(std::move(m));
    }
    return out;
}

nlohmann::json to_json(const ModelReport& m)
{
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [cat, n] : m.histogram)
        hist[to_string(cat)] = n;
    const auto& r = m.reliability;
    const auto& q = m.quality;
    const auto& e = m.efficiency;
    return {{"model_id", m.model_id},
            {"records", m.records},
            {"aborted", m.aborted},
            {"reliability",
             {{"iterations", r.iterations},
              {"r1_pct", opt(r.r1)},
              {"r2_pct", opt(r.r2)},
              {"r3_pct", opt(r.r3)},
              {"mesh_unconditional_pct", opt(r.mesh_unconditional)},
              {"fea_unconditional_pct", opt(r.fea_unconditional)}}},
            {"design_quality",
             {{"designs", q.designs},
              {"dq1_safety_factor", opt(q.dq1_safety_factor)},
              {"dq2_sf_per_cm3", opt(q.dq2_sf_per_cm3)},
              {"dq3_face_count", opt(q.dq3_face_count)},
              {"dq4_violation_pct", opt(q.dq4_violation_pct)},
              {"dq5_violation_ratio_pct", opt(q.dq5_violation_ratio_pct)}}},
            {"process_efficiency",
             {{"runs", e.runs},
              {"successes", e.successes},
              {"pe1", opt(e.pe1)},
              {"failure_rate_pct", opt(e.failure_rate_pct)}}},
            {"failure_histogram", hist}};
}

nlohmann::json report_json(const std::vector<ModelReport>& models)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& m : models)
        j.push_back(to_json(m));
    return {{"models", j}};
}

std::string report_text(const std::vector<ModelReport>& models)
{
    std::string s;
    auto out = std::back_inserter(s);

    fmt::format_to(out, "Reliability (stage pass rates, aborted runs excluded)\n");
    fmt::format_to(out, "{:<28} {:>6} {:>8} {:>8} {:>8} {:>10} {:>10}\n", "model", "iters", "R1", "R2", "R3",
                   "mesh/all", "fea/all");
    for (const auto& m : models) {
        const auto& r = m.reliability;
        fmt::format_to(out, "{:<28} {:>6} {:>8} {:>8} {:>8} {:>10} {:>10}\n", m.model_id, r.iterations, pct(r.r1),
                       pct(r.r2), pct(r.r3), pct(r.mesh_unconditional), pct(r.fea_unconditional));
    }

    fmt::format_to(out, "\nDesign quality (final design of each run that reached FEA)\n");
    fmt::format_to(out, "{:<28} {:>7} {:>16} {:>10} {:>8} {:>8} {:>16}\n", "model", "designs", "DQ1 SF",
                   "DQ2 SF/cm3", "DQ3", "DQ4", "DQ5");
    for (const auto& m : models) {
        const auto& q = m.quality;
        fmt::format_to(out, "{:<28} {:>7} {:>16} {:>10} {:>8} {:>8} {:>16}\n", m.model_id, q.designs,
                       mean_sd_text(q.dq1_safety_factor), num(q.dq2_sf_per_cm3, 4), num(q.dq3_face_count, 1),
                       pct(q.dq4_violation_pct), mean_sd_text(q.dq5_violation_ratio_pct));
    }

    fmt::format_to(out, "\nProcess efficiency\n");
    fmt::format_to(out, "{:<28} {:>6} {:>6} {:>8} {:>10}\n", "model", "runs", "valid", "PE1", "failed");
    for (const auto& m : models) {
        const auto& e = m.efficiency;
        fmt::format_to(out, "{:<28} {:>6} {:>6} {:>8} {:>10}\n", m.model_id, e.runs, e.successes, num(e.pe1),
                       pct(e.failure_rate_pct));
    }

    fmt::format_to(out, "\nFailure types (final category of runs that did not end valid)\n");
    for (const auto& m : models) {
        fmt::format_to(out, "{}:", m.model_id);
        if (m.histogram.empty())
            fmt::format_to(out, " none");
        for (const auto& [cat, n] : m.histogram)
            fmt::format_to(out, " {}={}", to_string(cat), n);
        if (m.aborted)
            fmt::format_to(out, " (aborted={})", m.aborted);
        fmt::format_to(out, "\n");
    }
    return s;
}

Report cmd_report(const std::filesystem::path& results)
{
    Report r;
    r.models = build_report(read_results(results));
    r.text = report_text(r.models);
    r.json = report_json(r.models);
    return r;
}

GroupSummary summarize_group(std::string label, const std::vector<RunRecord>& records)
{
    GroupSummary g;
    g.label = std::move(label);
    for (const auto& r : records) {
        if (r.final_status == RunStatus::Aborted)
            continue;
        ++g.runs;
        if (r.final_status == RunStatus::Valid) {
            ++g.successes;
            if (r.iterations_to_valid)
                g.iterations_to_valid.push_back(*r.iterations_to_valid);
        }
        for (const auto& it : r.iterations) {
            g.compile_ok.push_back(it.compile_ok ? 1.0 : 0.0);
            g.fea_ok.push_back(it.fea_ok ? 1.0 : 0.0);
        }
    }
    return g;
}

StatsReport compare_groups(const std::vector<GroupSummary>& groups)
{
    StatsReport s;
    s.groups = groups;
    if (groups.size() < 2) {
        s.notes.push_back("at least two groups are needed");
        return s;
    }
    if (groups.size() == 2) {
        const auto& a = groups[0];
        const auto& b = groups[1];
        if (a.runs == 0 || b.runs == 0) {
            s.notes.push_back("fisher: a group has no completed runs");
        } else {
            FisherResult f;
            f.table = {{{static_cast<long>(a.successes), static_cast<long>(a.runs - a.successes)},
                        {static_cast<long>(b.successes), static_cast<long>(b.runs - b.successes)}}};
            f.p_two_sided = stats::fisher_exact(f.table, stats::Alternative::TwoSided);
            f.p_greater = stats::fisher_exact(f.table, stats::Alternative::Greater);
            s.fisher = f;
        }
        const auto& xa = a.iterations_to_valid;
        const auto& xb = b.iterations_to_valid;
        if (xa.size() < 2 || xb.size() < 2)
            s.notes.push_back("welch: each group needs at least two valid runs");
        else if (!has_variance(xa) && !has_variance(xb))
            s.notes.push_back("welch: iterations-to-valid has no variance in either group");
        else
            s.welch = stats::welch_t(xa, xb);
        return s;
    }
    auto kw = [&](auto field, const char* name) -> std::optional<stats::KruskalWallis> {
        std::vector<std::vector<double>> data;
        for (const auto& g : groups) {
            if ((g.*field).empty()) {
                s.notes.push_back(fmt::format("kruskal-wallis {}: group {} has no iterations", name, g.label));
                return std::nullopt;
            }
            data.push_back(g.*field);
        }
        return stats::kruskal_wallis(data);
    };
    s.kw_compile = kw(&GroupSummary::compile_ok, "compile");
    s.kw_fea = kw(&GroupSummary::fea_ok, "fea");
    return s;
}

StatsReport cmd_stats(const std::vector<std::filesystem::path>& files)
{
    std::vector<GroupSummary> groups;
    if (files.size() == 1) {
        auto records = read_results(files[0]);
        if (records.empty())
            throw EmptyResults("no run records in " + files[0].string());
        std::map<std::string, std::vector<RunRecord>> by_model;
        for (auto& r : records)
            by_model[r.model_id].push_back(std::move(r));
        for (const auto& [id, runs] : by_model)
            groups.push_back(summarize_group(id, runs));
    } else {
        for (const auto& f : files) {
            auto records = read_results(f);
            if (records.empty())
                throw EmptyResults("no run records in " + f.string());
            groups.push_back(summarize_group(f.stem().string(), records));
        }
    }
    return compare_groups(groups);
}

nlohmann::json to_json(const StatsReport& s)
{
    nlohmann::json j;
    j["groups"] = nlohmann::json::array();
    for (const auto& g : s.groups)
        j["groups"].push_back({{"label", g.label},
                               {"runs", g.runs},
                               {"successes", g.successes},
                               {"valid_runs_with_iterations", g.iterations_to_valid.size()},
                               {"iterations", g.compile_ok.size()}});
    j["fisher"] = s.fisher ? nlohmann::json{{"table", s.fisher->table},
                                            {"p_two_sided", s.fisher->p_two_sided},
                                            {"p_greater", s.fisher->p_greater}}
                           : nlohmann::json(nullptr);
    j["welch"] = s.welch ? nlohmann::json{{"t", s.welch->t}, {"df", s.welch->df}, {"p", s.welch->p}}
                         : nlohmann::json(nullptr);
    auto kw = [](const std::optional<stats::KruskalWallis>& k) {
        return k ? nlohmann::json{{"h", k->h}, {"df", k->df}, {"p", k->p}} : nlohmann::json(nullptr);
    };
    j["kruskal_wallis_compile"] = kw(s.kw_compile);
    j["kruskal_wallis_fea"] = kw(s.kw_fea);
    j["notes"] = s.notes;
    return j;
}

std::string stats_text(const StatsReport& s)
{
    std::string out;
    auto it = std::back_inserter(out);
    for (const auto& g : s.groups)
        fmt::format_to(it, "{}: {}/{} valid, {} iterations\n", g.label, g.successes, g.runs, g.compile_ok.size());
    if (s.fisher) {
        const auto& t = s.fisher->table;
        fmt::format_to(it, "Fisher exact [[{}, {}], [{}, {}]]: p = {:.4g} (two-sided), {:.4g} (one-sided, first > second)\n",
                       t[0][0], t[0][1], t[1][0], t[1][1], s.fisher->p_two_sided, s.fisher->p_greater);
    }
    if (s.welch)
        fmt::format_to(it, "Welch t on iterations to valid: t = {:.3f}, df = {:.2f}, p = {:.4g}\n", s.welch->t,
                       s.welch->df, s.welch->p);
    if (s.kw_compile)
        fmt::format_to(it, "Kruskal-Wallis compile success: H = {:.2f}, df = {:.0f}, p = {:.4g}\n", s.kw_compile->h,
                       s.kw_compile->df, s.kw_compile->p);
    if (s.kw_fea)
        fmt::format_to(it, "Kruskal-Wallis FEA success: H = {:.2f}, df = {:.0f}, p = {:.4g}\n", s.kw_fea->h,
                       s.kw_fea->df, s.kw_fea->p);
    for (const auto& n : s.notes)
        fmt::format_to(it, "insufficient data: {}\n", n);
    return out;
}

} // namespace physcad::bench
