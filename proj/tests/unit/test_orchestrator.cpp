#include "common/fixtures.hpp"

#include "physcad/agent/orchestrator.hpp"

#include <doctest.h>

using namespace physcad;
using namespace physcad::agent;
using physcad::testing::bar_case;
using physcad::testing::box;
using physcad::testing::box_source;

namespace {

const char* kDisjoint = R"({"op": "union", "children": [
    {"op": "box", "min": [0, 0, 0], "max": [10, 10, 40]},
    {"op": "box", "min": [0, 0, 60], "max": [10, 10, 100]}]})";

PipelineConfig fast_config(int max_iterations = 10)
{
    PipelineConfig cfg;
    cfg.model_id = "mock";
    cfg.max_iterations = max_iterations;
    cfg.validation.resolution = 24;
    cfg.validation.material.poisson_ratio = 0.0;
    cfg.render_size = 64;
    cfg.attach_images = false;
    return cfg;
}

/// Bar whose full block has SF 10/3 at nu = 0.
LoadCase in_range_bar()
{
    return apply_variant(bar_case(), {1.0, 3.0});
}

std::string reply_with(const std::string& program)
{
    return "Here is the design:\n```json\n" + program + "\n```\n";
}

std::size_t count_role(const std::vector<ChatRequest>& reqs, AgentRole r)
{
    std::size_t n = 0;
    for (const auto& q : reqs)
        n += q.agent == r;
    return n;
}

} // namespace

TEST_SUITE("orchestrator")
{
    TEST_CASE("a passing design ends the run at the first iteration")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"PLAN: one block", 11, 13}};
        s[AgentRole::Engineer] = {{reply_with(box_source(bar_case().domain)), 17, 19}};
        s[AgentRole::GeometryReviewer] = {{"VERDICT: PASS", 23, 29}};
        s[AgentRole::StructuralReviewer] = {{"VERDICT: ACCEPT", 31, 37}};
        ScriptedBackend b(s);
        auto out = run_pipeline(in_range_bar(), b, fast_config(), {"g1_f3", 0, 42});
        const auto& rec = out.record;
        CHECK(rec.final_status == RunStatus::Valid);
        CHECK(rec.iterations_to_valid == 1);
        REQUIRE(rec.iterations.size() == 1);
        CHECK(*rec.iterations[0].safety_factor == doctest::Approx(10.0 / 3.0).epsilon(1e-6));
        CHECK(rec.iterations[0].in_target_range);
        CHECK(rec.run_seed == 42);
        CHECK(rec.variant == "g1_f3");

        // Exact token accounting: the sum of what the backend reported.
        CHECK(rec.input_tokens() == 11 + 17 + 23 + 31);
        CHECK(rec.output_tokens() == 13 + 19 + 29 + 37);
        REQUIRE(out.state.transcript.size() == 4);
        CHECK(out.state.transcript[0].role == AgentRole::Planner);
        CHECK(out.state.transcript[1].role == AgentRole::Engineer);
        CHECK(out.state.transcript[2].role == AgentRole::GeometryReviewer);
        CHECK(out.state.transcript[3].role == AgentRole::StructuralReviewer);
        CHECK(b.requests()[3].all_text().find("SAFETY_FACTOR:") != std::string::npos);
    }

    TEST_CASE("estimated token counts add up exactly")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan"}};
        s[AgentRole::Engineer] = {{"no program here"}};
        ScriptedBackend b(s);
        auto out = run_pipeline(in_range_bar(), b, fast_config(3), {});
        long in = 0, out_tokens = 0;
        for (const auto& q : b.requests())
            in += estimate_tokens(q.all_text());
        for (const auto& r : b.responses())
            out_tokens += estimate_tokens(r.text);
        CHECK(out.record.input_tokens() == in);
        CHECK(out.record.output_tokens() == out_tokens);
        long tin = 0;
        for (const auto& e : out.state.transcript)
            tin += e.input_tokens;
        CHECK(tin == in);
    }

    TEST_CASE("the geometry reviewer cannot pass a failing connectivity check")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan one"}, {"plan two"}};
        s[AgentRole::Engineer] = {{reply_with(kDisjoint)}};
        s[AgentRole::GeometryReviewer] = {{"Looks great.\nVERDICT: PASS"}};
        s[AgentRole::StructuralReviewer] = {{"VERDICT: ACCEPT"}};
        ScriptedBackend b(s);
        auto out = run_pipeline(in_range_bar(), b, fast_config(3), {});
        const auto& rec = out.record;
        CHECK(rec.final_status == RunStatus::IterationCap);
        CHECK(rec.final_category == FailureCategory::Connectivity);
        REQUIRE(rec.iterations.size() == 3);
        for (const auto& it : rec.iterations) {
            CHECK(it.failure_category == FailureCategory::Connectivity);
            CHECK_FALSE(it.fea_ok);
        }
        auto reqs = b.requests();
        CHECK(count_role(reqs, AgentRole::StructuralReviewer) == 0);

        // Iteration 2 goes back to the Engineer with the check output; after
        // two geometry failures on one plan the Planner replans.
        CHECK(count_role(reqs, AgentRole::Planner) == 2);
        std::vector<AgentRole> order;
        for (const auto& q : reqs)
            order.push_back(q.agent);
        CHECK(order == std::vector<AgentRole>{AgentRole::Planner, AgentRole::Engineer, AgentRole::GeometryReviewer,
                                              AgentRole::Engineer, AgentRole::GeometryReviewer, AgentRole::Planner,
                                              AgentRole::Engineer, AgentRole::GeometryReviewer});
        CHECK(reqs[3].all_text().find("Automatic geometry checks failed (Connectivity)") != std::string::npos);
        CHECK(reqs[5].all_text().find("failed the geometry checks") != std::string::npos);
    }

    TEST_CASE("an out-of-range safety factor goes to the planner")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan"}};
        s[AgentRole::Engineer] = {{reply_with(box_source(bar_case().domain))}};
        s[AgentRole::GeometryReviewer] = {{"VERDICT: PASS"}};
        s[AgentRole::StructuralReviewer] = {{"Remove material. VERDICT: REJECT"}};
        ScriptedBackend b(s);
        auto out = run_pipeline(bar_case(), b, fast_config(2), {}); // SF 10
        const auto& rec = out.record;
        CHECK(rec.final_status == RunStatus::IterationCap);
        CHECK(rec.final_category == FailureCategory::IterationCap);
        REQUIRE(rec.iterations.size() == 2);
        CHECK(*rec.iterations[0].safety_factor == doctest::Approx(10.0).epsilon(1e-6));
        CHECK_FALSE(rec.iterations[0].in_target_range);
        auto reqs = b.requests();
        REQUIRE(reqs.size() == 8);
        CHECK(reqs[4].agent == AgentRole::Planner);
        CHECK(reqs[4].all_text().find("over-built") != std::string::npos);
        CHECK(reqs[4].all_text().find("Remove material.") != std::string::npos);
        // The Engineer gets no structural feedback directly.
        CHECK(reqs[5].all_text().find("over-built") == std::string::npos);
    }

    TEST_CASE("extraction and compile failures go to the engineer")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan"}};
        s[AgentRole::Engineer] = {{"I cannot do that."}, {reply_with(R"({"op": "box", "min": [0, 0, 0]})")},
                                  {reply_with(box_source(bar_case().domain))}};
        s[AgentRole::GeometryReviewer] = {{"VERDICT: PASS"}};
        s[AgentRole::StructuralReviewer] = {{"VERDICT: ACCEPT"}};
        ScriptedBackend b(s);
        auto out = run_pipeline(in_range_bar(), b, fast_config(), {});
        const auto& rec = out.record;
        CHECK(rec.final_status == RunStatus::Valid);
        CHECK(rec.iterations_to_valid == 3);
        CHECK(rec.iterations[0].failure_category == FailureCategory::Compile);
        CHECK(rec.iterations[1].failure_category == FailureCategory::Compile);
        CHECK_FALSE(rec.iterations[1].compile_ok);
        auto reqs = b.requests();
        CHECK(count_role(reqs, AgentRole::Planner) == 1);
        CHECK(reqs[2].all_text().find("no JSON geometry program") != std::string::npos);
        CHECK(reqs[3].all_text().find("did not compile") != std::string::npos);
        CHECK(reqs[3].all_text().find("$.max") != std::string::npos);
    }

    TEST_CASE("the iteration cap is enforced")
    {
        for (int cap : {1, 4, 10}) {
            ScriptedBackend::Script s;
            s[AgentRole::Planner] = {{"plan"}};
            s[AgentRole::Engineer] = {{"never any json"}};
            ScriptedBackend b(s);
            auto out = run_pipeline(in_range_bar(), b, fast_config(cap), {});
            CHECK(out.record.iterations.size() == std::size_t(cap));
            CHECK(out.record.final_status == RunStatus::IterationCap);
            CHECK(out.record.final_category == FailureCategory::Compile);
            CHECK(count_role(b.requests(), AgentRole::Engineer) == std::size_t(cap));
            CHECK(out.record.iterations.back().iteration_index == cap);
        }
    }

    TEST_CASE("nothing from one run reaches the next")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"MARKER_PLAN_ONE"}, {"plan two"}};
        s[AgentRole::Engineer] = {{reply_with(kDisjoint) + "MARKER_ENGINEER_ONE"},
                                  {reply_with(box_source(box(0, 0, 0, 10, 10, 60)))}};
        s[AgentRole::GeometryReviewer] = {{"MARKER_REVIEW_ONE VERDICT: PASS"}, {"VERDICT: FAIL"}};
        s[AgentRole::StructuralReviewer] = {{"VERDICT: REJECT"}};
        ScriptedBackend b(s);
        auto first = run_pipeline(in_range_bar(), b, fast_config(1), {"g1_f3", 0, 1});
        const std::size_t first_count = b.requests().size();
        CHECK(first_count == 3);
        auto second = run_pipeline(in_range_bar(), b, fast_config(2), {"g1_f3", 1, 2});
        auto reqs = b.requests();
        REQUIRE(reqs.size() > first_count + 2);
        for (std::size_t i = first_count; i < reqs.size(); ++i) {
            CAPTURE(i);
            CHECK(reqs[i].all_text().find("MARKER") == std::string::npos);
            CHECK(reqs[i].all_text().find("40]") == std::string::npos); // first run's program
        }
        for (const auto& e : second.state.transcript)
            CHECK(e.prompt.find("MARKER") == std::string::npos);
        // The second run's own feedback does arrive.
        REQUIRE(reqs[reqs.size() - 2].agent == AgentRole::Engineer);
        CHECK(reqs[reqs.size() - 2].all_text().find("Automatic geometry checks failed (LoadArea)") != std::string::npos);
        CHECK(first.state.transcript.size() == 3);
    }

    TEST_CASE("a transport failure aborts the run and keeps spent tokens")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan", 5, 6}};
        s[AgentRole::Engineer] = {{reply_with(box_source(bar_case().domain)), 7, 8}};
        s[AgentRole::GeometryReviewer] = {{"VERDICT: PASS", 9, 10}};
        ScriptedBackend b(s); // no structural reviewer: the next call fails
        auto out = run_pipeline(in_range_bar(), b, fast_config(), {});
        CHECK(out.record.final_status == RunStatus::Aborted);
        CHECK_FALSE(out.record.abort_reason.empty());
        CHECK(out.record.input_tokens() == 21);
        CHECK(out.record.output_tokens() == 24);
        auto j = to_json(out.record);
        CHECK(run_from_json(j).final_status == RunStatus::Aborted);
    }

    TEST_CASE("without fea feedback no solver output reaches a prompt")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan"}};
        s[AgentRole::Engineer] = {{reply_with(box_source(bar_case().domain))}};
        s[AgentRole::GeometryReviewer] = {{"VERDICT: PASS"}};
        s[AgentRole::StructuralReviewer] = {{"Too bulky. VERDICT: REJECT"}, {"VERDICT: ACCEPT"}};
        ScriptedBackend b(s);
        auto cfg = fast_config(5);
        cfg.fea_feedback = false;
        auto out = run_pipeline(bar_case(), b, cfg, {}); // SF 10: accepted blind, out of range
        CHECK(out.record.final_status == RunStatus::Failed);
        CHECK(out.record.final_category == FailureCategory::OutOfRange);
        REQUIRE(out.record.iterations.size() == 2);
        // FEA still ran for the metrics.
        CHECK(out.record.iterations[1].fea_ok);
        CHECK(*out.record.iterations[1].safety_factor == doctest::Approx(10.0).epsilon(1e-6));
        for (const auto& q : b.requests()) {
            const std::string t = q.all_text();
            CHECK(t.find("SAFETY_FACTOR") == std::string::npos);
            CHECK(t.find("Peak von Mises") == std::string::npos);
            CHECK(t.find("Safety factor:") == std::string::npos);
        }
        // The rejection went to the planner.
        CHECK(b.requests()[4].agent == AgentRole::Planner);
        CHECK(b.requests()[4].all_text().find("Too bulky.") != std::string::npos);

        ScriptedBackend::Script s2 = s;
        s2[AgentRole::StructuralReviewer] = {{"VERDICT: ACCEPT"}};
        ScriptedBackend b2(s2);
        auto ok = run_pipeline(in_range_bar(), b2, cfg, {});
        CHECK(ok.record.final_status == RunStatus::Valid);
    }

    TEST_CASE("single agent pipeline")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Engineer] = {{reply_with(box_source(box(0, 0, 0, 10, 10, 60)))},
                                  {reply_with(box_source(bar_case().domain))}};
        ScriptedBackend b(s);
        auto out = single_agent_pipeline(in_range_bar(), b, fast_config(), {});
        CHECK(out.record.final_status == RunStatus::Valid);
        CHECK(out.record.iterations_to_valid == 2);
        for (const auto& q : b.requests())
            CHECK(q.agent == AgentRole::Engineer);
        CHECK(b.requests()[1].all_text().find("LoadArea") != std::string::npos);

        // Without FEA feedback the first design passing every check ends the
        // run, and no solver output is shown.
        ScriptedBackend b2(s);
        auto cfg = fast_config();
        cfg.fea_feedback = false;
        auto blind = single_agent_pipeline(bar_case(), b2, cfg, {});
        CHECK(blind.record.final_status == RunStatus::Failed);
        CHECK(blind.record.final_category == FailureCategory::OutOfRange);
        for (const auto& q : b2.requests()) {
            CHECK(q.all_text().find("SAFETY_FACTOR") == std::string::npos);
            CHECK(q.all_text().find("safety_factor") == std::string::npos);
        }
    }

    TEST_CASE("images reach the reviewers when enabled")
    {
        ScriptedBackend::Script s;
        s[AgentRole::Planner] = {{"plan"}};
        s[AgentRole::Engineer] = {{reply_with(box_source(bar_case().domain))}};
        s[AgentRole::GeometryReviewer] = {{"VERDICT: PASS"}};
        s[AgentRole::StructuralReviewer] = {{"VERDICT: ACCEPT"}};
        ScriptedBackend b(s);
        auto cfg = fast_config();
        cfg.attach_images = true;
        int seen = 0;
        cfg.on_iteration = [&](const IterationArtifacts& a) {
            ++seen;
            CHECK(a.views.size() == 4);
            CHECK(a.evaluation != nullptr);
        };
        auto out = run_pipeline(in_range_bar(), b, cfg, {});
        CHECK(seen == 1);
        auto reqs = b.requests();
        CHECK(reqs[0].image_count() == 1);
        CHECK(reqs[1].image_count() == 0);
        CHECK(reqs[2].image_count() == 4);
        CHECK(out.state.transcript[2].images == 4);
    }

    TEST_CASE("heuristic runs are reproducible")
    {
        auto cfg = fast_config();
        auto a = run_heuristic(in_range_bar(), cfg, {"g1_f3", 0, 9});
        auto b = run_heuristic(in_range_bar(), cfg, {"g1_f3", 0, 9});
        CHECK(to_json(a.record) == to_json(b.record));
        CHECK(a.record.final_status == RunStatus::Valid);
        CHECK(a.record.input_tokens() == 0);

        // Three voxels across the bar at resolution 24 are too coarse to thin.
        cfg.validation.resolution = 48;
        auto stiff = run_heuristic(bar_case(), cfg, {});
        CHECK(stiff.record.final_status == RunStatus::Valid);
        CHECK(stiff.record.iterations.size() > 1);
        CHECK(*stiff.record.iterations[0].safety_factor > 5.0);
    }
}
