#include "physcad/agent/orchestrator.hpp"

#include "physcad/agent/heuristic.hpp"
#include "physcad/agent/prompts.hpp"

#include <fmt/format.h>

#include <chrono>
#include <map>

namespace physcad::agent {

nlohmann::json to_json(const TranscriptEntry& e)
{
    return {{"iteration", e.iteration},     {"role", to_string(e.role)},
            {"prompt", e.prompt},           {"images", e.images},
            {"response", e.response},       {"input_tokens", e.input_tokens},
            {"output_tokens", e.output_tokens}};
}

std::optional<std::string> extract_json_object(std::string_view text)
{
    for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char ch = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (ch == '\\')
                    escaped = true;
                else if (ch == '"')
                    in_string = false;
                continue;
            }
            if (ch == '"')
                in_string = true;
            else if (ch == '{')
                ++depth;
            else if (ch == '}' && --depth == 0) {
                std::string candidate(text.substr(start, i - start + 1));
                if (nlohmann::json::accept(candidate))
                    return candidate;
                break;
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> parse_verdict(std::string_view text)
{
    std::optional<std::string> verdict;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string line(text.substr(pos, end - pos));
        for (auto& ch : line)
            ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (auto k = line.find("VERDICT:"); k != std::string::npos) {
            std::string word;
            for (std::size_t i = k + 8; i < line.size(); ++i) {
                if (std::isalpha(static_cast<unsigned char>(line[i])))
                    word += line[i];
                else if (!word.empty())
                    break;
            }
            if (!word.empty())
                verdict = word;
        }
        pos = end + 1;
    }
    return verdict;
}

namespace {

std::string fmt_box(const Box& b)
{
    return fmt::format("x [{:g}, {:g}], y [{:g}, {:g}], z [{:g}, {:g}]", b.lo.x(), b.hi.x(), b.lo.y(), b.hi.y(),
                       b.lo.z(), b.hi.z());
}

bool is_geometry_failure(FailureCategory c)
{
    switch (c) {
    case FailureCategory::DesignSpace:
    case FailureCategory::FixArea:
    case FailureCategory::LoadArea:
    case FailureCategory::Connectivity:
    case FailureCategory::Mesh:
        return true;
    default:
        return false;
    }
}

IterationRecord record_from(int k, const ValidationReport& r)
{
    IterationRecord rec;
    rec.iteration_index = k;
    rec.compile_ok = r.compiled;
    rec.mesh_ok = r.meshable;
    rec.fea_ok = r.fea.succeeded;
    if (r.fea.succeeded)
        rec.safety_factor = r.fea.safety_factor;
    rec.volume_mm3 = r.volume_mm3;
    rec.face_count = r.face_count;
    rec.design_space_violated = r.design_space.violated;
    rec.violation_ratio = r.design_space.violation_ratio;
    rec.failure_category = r.category;
    rec.in_target_range = r.fea.succeeded && r.fea.in_target_range;
    return rec;
}

std::string sf_text(double v)
{
    return fmt::format("{:g}", v);
}

/// Per-run driver shared by the language-model pipelines.
class Session {
public:
    Session(const LoadCase& c, AgentBackend& backend, const PipelineConfig& cfg, const RunIdentity& id)
        : backend_(backend), cfg_(cfg)
    {
        state.load_case = c;
        record.model_id = cfg.model_id;
        record.problem_id = c.problem_id;
        record.variant = id.variant;
        record.run_index = id.run_index;
        record.run_seed = id.seed;

        vars_["load_case"] = serialize_load_case(c);
        vars_["sf_lo"] = sf_text(cfg.validation.sf_range.lo);
        vars_["sf_hi"] = sf_text(cfg.validation.sf_range.hi);
        vars_["dsl_reference"] = render_template(prompt_template("dsl_reference.v1"), vars_);
        vars_["example"] =
            render_template(prompt_template("example.v1"), {{"example_case", serialize_load_case(example_case())}});
    }

    DesignState state;
    RunRecord record;

    PromptVars vars() const { return vars_; }

    void begin_iteration(int k)
    {
        state.iteration = k;
        current_ = IterationRecord{};
        current_.iteration_index = k;
        started_ = std::chrono::steady_clock::now();
    }

    std::string call(AgentRole role, const std::string& template_name, const PromptVars& vars,
                     const std::vector<std::vector<std::uint8_t>>& images = {})
    {
        ChatRequest req;
        req.model_id = cfg_.model_id;
        req.temperature = cfg_.temperature;
        req.max_output_tokens = cfg_.max_output_tokens;
        req.thinking = cfg_.thinking;
        req.agent = role;
        req.messages = render_messages(template_name, vars);
        if (cfg_.attach_images)
            for (const auto& png : images)
                req.messages.back().parts.push_back(MessagePart::from_image({"image/png", png}));

        ChatResponse res = backend_.chat(req);
        if (res.input_tokens < 0 || res.output_tokens < 0)
            throw BackendUnavailable("backend reported negative token counts");
        current_.input_tokens += res.input_tokens;
        current_.output_tokens += res.output_tokens;
        state.transcript.push_back(
            {state.iteration, role, req.all_text(), req.image_count(), res.text, res.input_tokens, res.output_tokens});
        return res.text;
    }

    /// Closes the iteration with the stage outcomes in `outcome`.
    void finish_iteration(IterationRecord outcome, const IterationArtifacts& art)
    {
        outcome.iteration_index = state.iteration;
        outcome.input_tokens = current_.input_tokens;
        outcome.output_tokens = current_.output_tokens;
        if (cfg_.record_timing)
            outcome.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        record.iterations.push_back(outcome);
        if (cfg_.on_iteration)
            cfg_.on_iteration(art);
    }

    void abort(const std::string& why)
    {
        // Tokens already spent in the interrupted iteration still count.
        if (current_.input_tokens || current_.output_tokens) {
            IterationRecord partial;
            partial.iteration_index = state.iteration;
            partial.input_tokens = current_.input_tokens;
            partial.output_tokens = current_.output_tokens;
            partial.failure_category = FailureCategory::None;
            record.iterations.push_back(partial);
        }
        record.final_status = RunStatus::Aborted;
        record.abort_reason = why;
    }

    std::vector<std::pair<ViewDirection, Image>> renders(const SurfaceMesh& mesh) const
    {
        std::vector<std::pair<ViewDirection, Image>> out;
        if (!cfg_.attach_images && !cfg_.on_iteration)
            return out;
        for (auto d : default_views())
            out.emplace_back(d, render_view(mesh, state.load_case, {d, cfg_.render_size, cfg_.render_size}));
        return out;
    }

    static std::vector<std::vector<std::uint8_t>> pngs(const std::vector<std::pair<ViewDirection, Image>>& views)
    {
        std::vector<std::vector<std::uint8_t>> out;
        for (const auto& [d, img] : views)
            out.push_back(encode_png(img));
        return out;
    }

private:
    AgentBackend& backend_;
    const PipelineConfig& cfg_;
    PromptVars vars_;
    IterationRecord current_;
    std::chrono::steady_clock::time_point started_;
};

std::string drain(std::vector<Feedback>& queue, const char* heading)
{
    if (queue.empty())
        return "";
    std::string out = std::string("\n") + heading + "\n";
    for (const auto& f : queue)
        out += fmt::format("[{}] {}\n", to_string(f.source), f.text);
    queue.clear();
    return out;
}

std::string previous_program(const DesignState& s)
{
    if (s.program_source.empty())
        return "";
    return "\nYour previous program:\n" + s.program_source + "\n";
}

void finalize(RunRecord& r)
{
    if (r.final_status == RunStatus::Aborted || r.final_status == RunStatus::Valid ||
        r.final_status == RunStatus::Failed)
        return;
    r.final_status = RunStatus::IterationCap;
    const FailureCategory last = r.iterations.empty() ? FailureCategory::None : r.iterations.back().failure_category;
    r.final_category = last == FailureCategory::None ? FailureCategory::IterationCap : last;
}

void mark_valid(RunRecord& r, int k)
{
    r.final_status = RunStatus::Valid;
    r.final_category = FailureCategory::None;
    r.iterations_to_valid = k;
}

std::string geometry_summary(const Evaluation& ev)
{
    const auto& r = ev.report;
    std::string s;
    if (r.volume_mm3)
        s += fmt::format("Volume: {:.1f} cm^3\n", *r.volume_mm3 / 1000.0);
    if (r.face_count)
        s += fmt::format("Faces: {}\n", *r.face_count);
    if (ev.grid) {
        Box occupied;
        bool any = false;
        const auto& g = *ev.grid;
        for (std::size_t i = 0; i < g.occupancy.size(); ++i)
            if (g.occupancy[i]) {
                const Vec3 c = g.frame.center(i);
                const Box v{c.array() - 0.5 * g.spacing(), c.array() + 0.5 * g.spacing()};
                occupied = any ? occupied.united(v) : v;
                any = true;
            }
        if (any)
            s += "Bounding box: " + fmt_box(occupied) + "\n";
    }
    return s;
}

/// Raw deterministic tool output for the single-agent Engineer.
std::string tool_output(const Evaluation& ev, const PipelineConfig& cfg)
{
    nlohmann::json j = to_json(ev.report);
    if (!cfg.fea_feedback) {
        j.erase("fea");
        j.erase("verdict");
    }
    std::string s = "\nTool output for your previous program:\n" + j.dump(2) + "\n";
    if (cfg.fea_feedback && ev.fem)
        s += structural_report(ev, cfg.validation, cfg.hotspot_count);
    return s;
}

} // namespace

std::string structural_report(const Evaluation& ev, const ValidationOptions& opts, int hotspots)
{
    const auto& r = ev.report;
    if (!ev.fem || !ev.mesh)
        return fmt::format("FEA did not complete: {}\n", r.fea.error);
    const double sf = r.fea.safety_factor;
    std::string verdict;
    if (sf > opts.sf_range.hi)
        verdict = "over-built (over-engineered): remove material";
    else if (sf < opts.sf_range.lo)
        verdict = "under-built: add material where stress is highest";
    else
        verdict = "within the target range";

    std::string s;
    s += fmt::format("Safety factor: {:.3f} (target {:g} to {:g}); {}\n", sf, opts.sf_range.lo, opts.sf_range.hi,
                     verdict);
    s += fmt::format("Peak von Mises stress: {:.3f} MPa (yield {:g} MPa)\n", r.fea.max_von_mises,
                     opts.material.yield_strength);
    if (r.volume_mm3)
        s += fmt::format("Part volume: {:.2f} cm^3\n", *r.volume_mm3 / 1000.0);
    auto spots = stress_hotspots(*ev.fem, *ev.mesh, static_cast<std::size_t>(std::max(1, hotspots)));
    s += fmt::format("Top {} stress hotspots (element centroid in mm, von Mises in MPa):\n", spots.size());
    for (std::size_t i = 0; i < spots.size(); ++i)
        s += fmt::format("  {}. ({:.1f}, {:.1f}, {:.1f}) {:.3f}\n", i + 1, spots[i].centroid.x(),
                         spots[i].centroid.y(), spots[i].centroid.z(), spots[i].von_mises);
    s += fmt::format("SAFETY_FACTOR: {:.6g}\n", sf);
    return s;
}

std::string checks_summary(const ValidationReport& r, const LoadCase& c)
{
    std::string s;
    s += "Design domain: " + fmt_box(c.domain) + "\n";
    for (const auto& k : c.keep_out)
        s += "Keep-out region (no material allowed): " + fmt_box(k) + "\n";
    if (r.design_space.violated)
        s += fmt::format("Design space: VIOLATED, {:.1f} mm^3 of material outside the allowed space "
                         "(violation ratio {:.2f}% of the domain volume)\n",
                         r.design_space.outside_volume, 100.0 * r.design_space.violation_ratio);
    else
        s += "Design space: OK\n";
    if (r.empty_regions.empty()) {
        s += "Support and load regions: all touch material\n";
    } else {
        s += "Regions without material:";
        for (const auto& id : r.empty_regions)
            s += " " + id + " (" + fmt_box(c.selector(id).query) + ")";
        s += "\n";
    }
    s += fmt::format("Connectivity: {} separate solid piece(s); supports and loads {}\n",
                     r.connectivity.component_count,
                     r.connectivity.all_regions_connected ? "are joined by one solid" : "are NOT joined by one solid");
    s += fmt::format("Meshing: {}\n", r.meshable ? "ok" : "failed");
    if (r.volume_mm3)
        s += fmt::format("Volume: {:.2f} cm^3\n", *r.volume_mm3 / 1000.0);
    s += "Overall: " + (is_geometry_failure(r.category) ? "FAILED (" + to_string(r.category) + ")" : std::string("passed")) +
         "\n";
    return s;
}

RunOutcome run_pipeline(const LoadCase& c, AgentBackend& backend, const PipelineConfig& cfg, const RunIdentity& id)
{
    Session s(c, backend, cfg, id);
    auto& st = s.state;
    bool need_plan = true;
    int geometry_streak = 0;

    try {
        for (int k = 1; k <= cfg.max_iterations; ++k) {
            s.begin_iteration(k);

            if (need_plan) {
                auto vars = s.vars();
                vars["feedback"] = drain(st.planner_feedback, "Feedback on the previous design:");
                Image domain_view = render_view({}, c, {ViewDirection::Iso, cfg.render_size, cfg.render_size});
                st.plan = s.call(AgentRole::Planner, "planner.v1", vars, {encode_png(domain_view)});
                need_plan = false;
                geometry_streak = 0;
            }

            auto vars = s.vars();
            vars["plan"] = st.plan;
            vars["previous_program"] = previous_program(st);
            vars["feedback"] = drain(st.engineer_feedback, "Feedback to address:");
            const std::string reply = s.call(AgentRole::Engineer, "engineer.v1", vars);

            auto source = extract_json_object(reply);
            if (!source) {
                st.engineer_feedback.push_back(
                    {AgentRole::Engineer, "Your reply contained no JSON geometry program. Reply with one JSON object."});
                IterationRecord rec;
                rec.failure_category = FailureCategory::Compile;
                s.finish_iteration(rec, {k, reply, nullptr, {}});
                continue;
            }
            st.program_source = *source;
            Evaluation ev = evaluate_source(*source, c, cfg.validation);
            st.validation = ev.report;
            const ValidationReport& r = ev.report;
            if (!r.compiled) {
                st.geometry.reset();
                st.engineer_feedback.push_back(
                    {AgentRole::Engineer, "The geometry program did not compile: " + r.compile_error});
                s.finish_iteration(record_from(k, r), {k, *source, nullptr, {}});
                continue;
            }
            st.geometry = GeometryProgram::parse(*source);

            auto views = s.renders(ev.surface);
            auto images = Session::pngs(views);
            IterationArtifacts art{k, *source, &ev, views};

            auto gvars = s.vars();
            gvars["plan"] = st.plan;
            gvars["program"] = *source;
            gvars["checks"] = checks_summary(r, c);
            const std::string review = s.call(AgentRole::GeometryReviewer, "geometry_reviewer.v1", gvars, images);
            const bool model_pass = parse_verdict(review).value_or("FAIL") == "PASS";

            if (is_geometry_failure(r.category)) {
                // Deterministic failures stand regardless of the reviewer's verdict.
                st.engineer_feedback.push_back({AgentRole::GeometryReviewer,
                                                "Automatic geometry checks failed (" + to_string(r.category) +
                                                    "):\n" + checks_summary(r, c) + "Reviewer notes: " + review});
                if (++geometry_streak >= cfg.geometry_failures_before_replan) {
                    need_plan = true;
                    st.planner_feedback.push_back(
                        {AgentRole::GeometryReviewer,
                         fmt::format("The last {} designs built from this plan failed the geometry checks; the most "
                                     "recent failure:\n{}",
                                     geometry_streak, checks_summary(r, c))});
                }
                s.finish_iteration(record_from(k, r), art);
                continue;
            }
            geometry_streak = 0;
            if (!model_pass)
                st.engineer_feedback.push_back({AgentRole::GeometryReviewer, "Advisory review notes: " + review});

            if (r.category == FailureCategory::FEA) {
                st.engineer_feedback.push_back({AgentRole::StructuralReviewer,
                                                "The finite element solve failed: " + r.fea.error +
                                                    ". The part is probably under-constrained or only loosely joined."});
                s.finish_iteration(record_from(k, r), art);
                continue;
            }

            if (cfg.fea_feedback) {
                const std::string report = structural_report(ev, cfg.validation, cfg.hotspot_count);
                auto svars = s.vars();
                svars["plan"] = st.plan;
                svars["structural_report"] = report;
                const std::string advice = s.call(AgentRole::StructuralReviewer, "structural_reviewer.v1", svars);
                s.finish_iteration(record_from(k, r), art);
                if (r.valid()) {
                    mark_valid(s.record, k);
                    break;
                }
                st.planner_feedback.push_back({AgentRole::StructuralReviewer, report + "Reviewer advice: " + advice});
                need_plan = true;
            } else {
                auto svars = s.vars();
                svars["plan"] = st.plan;
                svars["geometry_summary"] = geometry_summary(ev);
                const std::string advice =
                    s.call(AgentRole::StructuralReviewer, "structural_reviewer_blind.v1", svars, images);
                s.finish_iteration(record_from(k, r), art);
                if (parse_verdict(advice).value_or("REJECT") == "ACCEPT") {
                    if (r.valid()) {
                        mark_valid(s.record, k);
                    } else {
                        s.record.final_status = RunStatus::Failed;
                        s.record.final_category = FailureCategory::OutOfRange;
                    }
                    break;
                }
                st.planner_feedback.push_back({AgentRole::StructuralReviewer, advice});
                need_plan = true;
            }
        }
    } catch (const BackendUnavailable& e) {
        s.abort(e.what());
    }
    finalize(s.record);
    return {std::move(s.record), std::move(s.state)};
}

RunOutcome single_agent_pipeline(const LoadCase& c, AgentBackend& backend, const PipelineConfig& cfg,
                                 const RunIdentity& id)
{
    Session s(c, backend, cfg, id);
    auto& st = s.state;
    std::string tools;
    std::vector<std::vector<std::uint8_t>> images;

    try {
        for (int k = 1; k <= cfg.max_iterations; ++k) {
            s.begin_iteration(k);
            auto vars = s.vars();
            vars["previous_program"] = previous_program(st);
            vars["tool_output"] = tools;
            const std::string reply = s.call(AgentRole::Engineer, "single_engineer.v1", vars, images);

            auto source = extract_json_object(reply);
            if (!source) {
                tools = "\nTool output: no JSON geometry program found in your reply.\n";
                images.clear();
                IterationRecord rec;
                rec.failure_category = FailureCategory::Compile;
                s.finish_iteration(rec, {k, reply, nullptr, {}});
                continue;
            }
            st.program_source = *source;
            Evaluation ev = evaluate_source(*source, c, cfg.validation);
            st.validation = ev.report;
            const ValidationReport& r = ev.report;
            if (!r.compiled) {
                tools = "\nTool output: compile error: " + r.compile_error + "\n";
                images.clear();
                s.finish_iteration(record_from(k, r), {k, *source, nullptr, {}});
                continue;
            }
            st.geometry = GeometryProgram::parse(*source);
            auto views = s.renders(ev.surface);
            images = Session::pngs(views);
            s.finish_iteration(record_from(k, r), {k, *source, &ev, views});

            if (r.valid()) {
                mark_valid(s.record, k);
                break;
            }
            if (!cfg.fea_feedback && r.checks_passed()) {
                s.record.final_status = RunStatus::Failed;
                s.record.final_category = FailureCategory::OutOfRange;
                break;
            }
            tools = tool_output(ev, cfg);
        }
    } catch (const BackendUnavailable& e) {
        s.abort(e.what());
    }
    finalize(s.record);
    return {std::move(s.record), std::move(s.state)};
}

RunOutcome run_heuristic(const LoadCase& c, const PipelineConfig& cfg, const RunIdentity& id)
{
    RunOutcome out;
    RunRecord& rec = out.record;
    rec.model_id = cfg.model_id;
    rec.problem_id = c.problem_id;
    rec.variant = id.variant;
    rec.run_index = id.run_index;
    rec.run_seed = id.seed;
    out.state.load_case = c;

    const HeuristicPlan plan = plan_heuristic(c);
    out.state.plan = fmt::format("block {} thinned on {} axes about the common selector range", fmt_box(plan.hull),
                                 plan.scalable_axes.size());
    ThicknessSearch search;
    std::map<double, Evaluation> cache;

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        const auto started = std::chrono::steady_clock::now();
        out.state.iteration = k;
        const double t = search.current();
        const GeometryProgram program = heuristic_program(plan, t);
        auto it = cache.find(t);
        if (it == cache.end())
            it = cache.emplace(t, evaluate(program, c, cfg.validation)).first;
        const Evaluation& ev = it->second;
        const ValidationReport& r = ev.report;

        out.state.program_source = program.to_json().dump();
        out.state.geometry = program;
        out.state.validation = r;

        IterationRecord ir = record_from(k, r);
        if (cfg.record_timing)
            ir.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        rec.iterations.push_back(ir);
        if (cfg.on_iteration) {
            std::vector<std::pair<ViewDirection, Image>> views;
            for (auto d : default_views())
                views.emplace_back(d, render_view(ev.surface, c, {d, cfg.render_size, cfg.render_size}));
            cfg.on_iteration({k, out.state.program_source, &ev, views});
        }

        if (r.valid()) {
            mark_valid(rec, k);
            break;
        }
        if (r.checks_passed() && r.fea.safety_factor > cfg.validation.sf_range.hi)
            search.too_stiff();
        else
            search.too_weak();
    }
    finalize(rec);
    return out;
}

} // namespace physcad::agent
