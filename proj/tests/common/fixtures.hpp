#pragma once

#include "physcad/geometry.hpp"
#include "physcad/loadcase.hpp"
#include "physcad/metrics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace physcad::testing {

inline Box box(double x0, double y0, double z0, double x1, double y1, double z1)
{
    return {{x0, y0, z0}, {x1, y1, z1}};
}

inline GeometryProgram box_program(const Box& b)
{
    return GeometryProgram(CsgNode{BoxPrim{b.lo, b.hi}});
}

inline std::string box_source(const Box& b)
{
    return box_program(b).to_json().dump();
}

/// Bar along z of cross-section a x a and length L, clamped at z = 0, pulled
/// along +z on the far face. `full_fixity` false locks only the three
/// rigid-body directions so the bar can contract laterally.
inline LoadCase bar_case(double a = 10.0, double L = 100.0, double force = 2500.0, bool full_fixity = true)
{
    LoadCase c;
    c.problem_id = "BAR";
    c.domain = box(0, 0, 0, a, a, L);
    if (full_fixity) {
        c.selectors.push_back({"root", box(0, 0, 0, a, a, 0)});
        c.boundary_conditions.push_back({"root", {true, true, true}});
    } else {
        c.selectors.push_back({"root", box(0, 0, 0, a, a, 0)});
        c.selectors.push_back({"root_x_line", box(0, 0, 0, 0, a, 0)});
        c.selectors.push_back({"root_y_line", box(0, 0, 0, a, 0, 0)});
        c.boundary_conditions.push_back({"root", {false, false, true}});
        c.boundary_conditions.push_back({"root_x_line", {true, false, false}});
        c.boundary_conditions.push_back({"root_y_line", {false, true, false}});
    }
    c.selectors.push_back({"tip", box(0, 0, L, a, a, L)});
    c.loads.push_back({"tip", LoadKind::DistributedForce, force, Vec3::UnitZ()});
    validate_load_case(c);
    return c;
}

/// Cantilever along x: length L, width b (y), height h (z); clamped at x = 0
/// with a downward shear load on the free end face.
inline LoadCase cantilever_case(double L, double b, double h, double force)
{
    LoadCase c;
    c.problem_id = "CANTILEVER";
    c.domain = box(0, 0, 0, L, b, h);
    c.selectors.push_back({"root", box(0, 0, 0, 0, b, h)});
    c.selectors.push_back({"tip", box(L, 0, 0, L, b, h)});
    c.boundary_conditions.push_back({"root", {true, true, true}});
    c.loads.push_back({"tip", LoadKind::DistributedForce, force, -Vec3::UnitZ()});
    validate_load_case(c);
    return c;
}

inline IterationRecord it_compile_fail(int k)
{
    IterationRecord r;
    r.iteration_index = k;
    r.failure_category = FailureCategory::Compile;
    return r;
}

inline IterationRecord it_mesh_fail(int k, FailureCategory cat)
{
    IterationRecord r;
    r.iteration_index = k;
    r.compile_ok = true;
    r.failure_category = cat;
    return r;
}

inline IterationRecord it_fea_fail(int k)
{
    IterationRecord r;
    r.iteration_index = k;
    r.compile_ok = true;
    r.mesh_ok = true;
    r.failure_category = FailureCategory::FEA;
    return r;
}

inline IterationRecord it_solved(int k, double sf, double volume, int faces, double violation_ratio = 0.0)
{
    IterationRecord r;
    r.iteration_index = k;
    r.compile_ok = r.mesh_ok = r.fea_ok = true;
    r.safety_factor = sf;
    r.volume_mm3 = volume;
    r.face_count = faces;
    r.violation_ratio = violation_ratio;
    r.design_space_violated = violation_ratio > 0.0;
    r.in_target_range = sf >= 2.0 && sf <= 5.0;
    r.failure_category = r.design_space_violated ? FailureCategory::DesignSpace : FailureCategory::None;
    r.input_tokens = 100 * k;
    r.output_tokens = 10 * k;
    return r;
}

inline RunRecord run(int index, std::vector<IterationRecord> its, RunStatus status, FailureCategory cat,
                     std::optional<int> to_valid = std::nullopt)
{
    RunRecord r;
    r.model_id = "fixture-model";
    r.problem_id = "P" + std::to_string(index % 3);
    r.variant = "g1_f1";
    r.run_index = index;
    r.run_seed = 1000u + static_cast<unsigned>(index);
    r.iterations = std::move(its);
    r.final_status = status;
    r.final_category = cat;
    r.iterations_to_valid = to_valid;
    if (status == RunStatus::Aborted)
        r.abort_reason = "HTTP 503 after 3 retries";
    return r;
}

/// Ten runs covering every stage outcome; run 6 is aborted and must be
/// ignored by every metric.
inline std::vector<RunRecord> ten_record_fixture()
{
    using FC = FailureCategory;
    using RS = RunStatus;
    return {
        run(0, {it_solved(1, 3.0, 2000, 6)}, RS::Valid, FC::None, 1),
        run(1, {it_compile_fail(1), it_solved(2, 4.0, 4000, 8)}, RS::Valid, FC::None, 2),
        run(2, {it_solved(1, 8.0, 1000, 6), it_solved(2, 6.0, 1000, 6), it_fea_fail(3)}, RS::IterationCap, FC::FEA),
        run(3, {it_mesh_fail(1, FC::Connectivity), it_mesh_fail(2, FC::Connectivity)}, RS::IterationCap,
            FC::Connectivity),
        run(4, {it_compile_fail(1), it_compile_fail(2), it_solved(3, 2.5, 500, 10)}, RS::Valid, FC::None, 3),
        run(5, {it_solved(1, 10.0, 2000, 7, 0.02), it_solved(2, 1.0, 1000, 6, 0.01)}, RS::IterationCap,
            FC::DesignSpace),
        run(6, {it_solved(1, 3.0, 1000, 6)}, RS::Aborted, FC::None),
        run(7, {it_compile_fail(1), it_compile_fail(2)}, RS::IterationCap, FC::Compile),
        run(8, {it_solved(1, 5.0, 1000, 6)}, RS::Valid, FC::None, 1),
        run(9, {it_solved(1, 1.5, 1000, 6), it_solved(2, 1.8, 2000, 6)}, RS::IterationCap, FC::IterationCap),
    };
}

/// Values worked out by hand from the fixture above (aborted run 6 excluded).
///   iterations 1+2+3+2+3+2+2+1+2 = 18; compiled 13; meshed 11; solved 10
///   final designs (last fea_ok iteration): runs 0,1,2,4,5,8,9
///     SF      3, 4, 6, 2.5, 1, 5, 1.8           sum 23.3
///     SF/cm3  1.5, 1, 6, 5, 1, 5, 0.9           sum 20.4
///     faces   6, 8, 6, 10, 6, 6, 6              sum 48
///     violated only run 5 (ratio 0.01)
///   valid runs 0,1,4,8 at iterations 1,2,3,1
struct FixtureExpected {
    static constexpr std::size_t iterations = 18;
    static constexpr double r1 = 100.0 * 13.0 / 18.0;
    static constexpr double r2 = 100.0 * 11.0 / 13.0;
    static constexpr double r3 = 100.0 * 10.0 / 11.0;
    static constexpr double mesh_unconditional = 100.0 * 11.0 / 18.0;
    static constexpr double fea_unconditional = 100.0 * 10.0 / 18.0;
    static constexpr std::size_t designs = 7;
    static constexpr double dq1_mean = 23.3 / 7.0;
    // sqrt(sum((x - mean)^2) / 6)
    static constexpr double dq1_sd = 1.776433023143368;
    static constexpr double dq2 = 20.4 / 7.0;
    static constexpr double dq3 = 48.0 / 7.0;
    static constexpr double dq4 = 100.0 / 7.0;
    static constexpr double dq5_mean = 1.0 / 7.0;
    static constexpr double dq5_sd = 0.3779644730092272;
    static constexpr std::size_t runs = 9;
    static constexpr std::size_t successes = 4;
    static constexpr double pe1 = 7.0 / 4.0;
    static constexpr double failure_rate = 100.0 * 5.0 / 9.0;
    static std::map<FailureCategory, std::size_t> histogram()
    {
        return {{FailureCategory::Compile, 1},
                {FailureCategory::DesignSpace, 1},
                {FailureCategory::Connectivity, 1},
                {FailureCategory::FEA, 1},
                {FailureCategory::IterationCap, 1}};
    }
};

} // namespace physcad::testing
