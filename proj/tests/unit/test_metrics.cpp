#include "common/fixtures.hpp"

#include "physcad/metrics.hpp"

#include <doctest.h>

#include <numeric>

using namespace physcad;
using physcad::testing::FixtureExpected;
using physcad::testing::ten_record_fixture;

TEST_SUITE("metrics")
{
    TEST_CASE("reliability on the fixture")
    {
        auto r = reliability(ten_record_fixture());
        CHECK(r.iterations == FixtureExpected::iterations);
        CHECK(*r.r1 == doctest::Approx(FixtureExpected::r1).epsilon(1e-12));
        CHECK(*r.r2 == doctest::Approx(FixtureExpected::r2).epsilon(1e-12));
        CHECK(*r.r3 == doctest::Approx(FixtureExpected::r3).epsilon(1e-12));
        CHECK(*r.mesh_unconditional == doctest::Approx(FixtureExpected::mesh_unconditional).epsilon(1e-12));
        CHECK(*r.fea_unconditional == doctest::Approx(FixtureExpected::fea_unconditional).epsilon(1e-12));
    }

    TEST_CASE("design quality on the fixture")
    {
        auto q = design_quality(ten_record_fixture());
        CHECK(q.designs == FixtureExpected::designs);
        CHECK(q.dq1_safety_factor->mean == doctest::Approx(FixtureExpected::dq1_mean).epsilon(1e-12));
        CHECK(*q.dq1_safety_factor->sd == doctest::Approx(FixtureExpected::dq1_sd).epsilon(1e-12));
        CHECK(*q.dq2_sf_per_cm3 == doctest::Approx(FixtureExpected::dq2).epsilon(1e-12));
        CHECK(*q.dq3_face_count == doctest::Approx(FixtureExpected::dq3).epsilon(1e-12));
        CHECK(*q.dq4_violation_pct == doctest::Approx(FixtureExpected::dq4).epsilon(1e-12));
        CHECK(q.dq5_violation_ratio_pct->mean == doctest::Approx(FixtureExpected::dq5_mean).epsilon(1e-12));
        CHECK(*q.dq5_violation_ratio_pct->sd == doctest::Approx(FixtureExpected::dq5_sd).epsilon(1e-12));
    }

    TEST_CASE("process efficiency and failure histogram on the fixture")
    {
        auto runs = ten_record_fixture();
        auto p = process_efficiency(runs);
        CHECK(p.runs == FixtureExpected::runs);
        CHECK(p.successes == FixtureExpected::successes);
        CHECK(*p.pe1 == doctest::Approx(FixtureExpected::pe1).epsilon(1e-12));
        CHECK(*p.failure_rate_pct == doctest::Approx(FixtureExpected::failure_rate).epsilon(1e-12));

        auto h = failure_histogram(runs);
        CHECK(h == FixtureExpected::histogram());
        std::size_t total = 0;
        for (const auto& [c, n] : h)
            total += n;
        CHECK(total == p.runs - p.successes);
    }

    TEST_CASE("aborted runs do not move any metric")
    {
        auto runs = ten_record_fixture();
        std::vector<RunRecord> without;
        for (const auto& r : runs)
            if (r.final_status != RunStatus::Aborted)
                without.push_back(r);
        CHECK(reliability(runs).r1 == reliability(without).r1);
        CHECK(design_quality(runs).dq2_sf_per_cm3 == design_quality(without).dq2_sf_per_cm3);
        CHECK(process_efficiency(runs).pe1 == process_efficiency(without).pe1);
    }

    TEST_CASE("conditional rates are absent without a denominator")
    {
        std::vector<RunRecord> none;
        auto r = reliability(none);
        CHECK(r.iterations == 0);
        CHECK_FALSE(r.r1);
        std::vector<RunRecord> compile_only{ten_record_fixture()[7]};
        auto r2 = reliability(compile_only);
        CHECK(*r2.r1 == 0.0);
        CHECK_FALSE(r2.r2);
        CHECK_FALSE(r2.r3);
        auto q = design_quality(compile_only);
        CHECK(q.designs == 0);
        CHECK_FALSE(q.dq1_safety_factor);
        CHECK_FALSE(process_efficiency(compile_only).pe1);
    }

    TEST_CASE("funnel monotonicity")
    {
        for (const auto& run : ten_record_fixture())
            for (const auto& it : run.iterations) {
                CHECK((!it.mesh_ok || it.compile_ok));
                CHECK((!it.fea_ok || it.mesh_ok));
            }
    }

    TEST_CASE("records round trip through json")
    {
        for (const auto& r : ten_record_fixture()) {
            auto j = to_json(r);
            RunRecord back = run_from_json(j);
            CHECK(to_json(back) == j);
            CHECK(back.input_tokens() == r.input_tokens());
            CHECK(back.iterations.size() == r.iterations.size());
            CHECK(back.iterations_to_valid == r.iterations_to_valid);
        }
        auto r = ten_record_fixture()[0];
        CHECK(r.input_tokens() == 100);
        CHECK(r.output_tokens() == 10);
        CHECK(r.final_design() == &r.iterations[0]);
    }

    TEST_CASE("inconsistent stage flags are rejected")
    {
        auto j = to_json(ten_record_fixture()[0]);
        j["iterations"][0]["compile_ok"] = false;
        CHECK_THROWS(run_from_json(j));
        j = to_json(ten_record_fixture()[0]);
        j["iterations"][0]["mesh_ok"] = false;
        CHECK_THROWS(run_from_json(j));
    }

    TEST_CASE("mean and sample standard deviation")
    {
        CHECK_FALSE(mean_sd({}));
        auto one = mean_sd({4.0});
        CHECK(one->mean == 4.0);
        CHECK_FALSE(one->sd);
        auto m = mean_sd({2, 4, 4, 4, 5, 5, 7, 9});
        CHECK(m->mean == doctest::Approx(5.0));
        CHECK(*m->sd == doctest::Approx(std::sqrt(32.0 / 7.0)));
        CHECK(m->n == 8);
    }
}
