#include "physcad/agent/heuristic.hpp"

#include <cmath>

namespace physcad::agent {

HeuristicPlan plan_heuristic(const LoadCase& c)
{
    HeuristicPlan p;
    p.keep_out = c.keep_out;

    std::vector<Box> regions;
    for (const auto& bc : c.boundary_conditions)
        regions.push_back(c.selector(bc.selector_id).query.intersection(c.domain));
    for (const auto& l : c.loads)
        regions.push_back(c.selector(l.selector_id).query.intersection(c.domain));

    Box hull = regions.front();
    Box common = regions.front();
    for (const auto& r : regions) {
        hull = hull.united(r);
        common = common.intersection(r);
    }
    const Vec3 dom = c.domain.extent();
    for (int a = 0; a < 3; ++a)
        if (hull.extent()[a] < 0.1 * dom[a]) {
            hull.lo[a] = c.domain.lo[a];
            hull.hi[a] = c.domain.hi[a];
        }
    p.hull = hull;

    Vec3 load_sum = Vec3::Zero();
    for (const auto& l : c.loads)
        load_sum += (l.magnitude_newtons * l.direction).cwiseAbs();
    load_sum.maxCoeff(&p.dominant_axis);

    p.pivot = hull.center();
    for (int a = 0; a < 3; ++a) {
        if (a == p.dominant_axis || common.lo[a] > common.hi[a])
            continue;
        p.scalable_axes.push_back(a);
        p.pivot[a] = 0.5 * (common.lo[a] + common.hi[a]);
    }
    return p;
}

GeometryProgram heuristic_program(const HeuristicPlan& plan, double t)
{
    if (!(t > 0.0 && t <= 1.0))
        throw std::invalid_argument("thickness factor must be in (0, 1]");
    Box b = plan.hull;
    for (int a : plan.scalable_axes) {
        b.lo[a] = plan.pivot[a] + t * (plan.hull.lo[a] - plan.pivot[a]);
        b.hi[a] = plan.pivot[a] + t * (plan.hull.hi[a] - plan.pivot[a]);
        // A zero-width common range would collapse the box; keep a sliver.
        if (b.hi[a] - b.lo[a] < 1e-6 * plan.hull.extent()[a]) {
            b.lo[a] = plan.pivot[a] - 0.5e-6 * plan.hull.extent()[a];
            b.hi[a] = plan.pivot[a] + 0.5e-6 * plan.hull.extent()[a];
        }
    }
    CsgNode block{BoxPrim{b.lo, b.hi}};
    if (plan.keep_out.empty())
        return GeometryProgram(std::move(block));
    BooleanNode diff{BoolOp::Difference, {std::move(block)}};
    for (const auto& k : plan.keep_out)
        diff.children.push_back(CsgNode{BoxPrim{k.lo, k.hi}});
    return GeometryProgram(CsgNode{std::move(diff)});
}

void ThicknessSearch::too_stiff()
{
    hi_ = t_;
    t_ = 0.5 * (lo_ + hi_);
}

void ThicknessSearch::too_weak()
{
    if (t_ >= 1.0) {
        exhausted_ = true;
        return;
    }
    lo_ = t_;
    t_ = 0.5 * (lo_ + hi_);
}

} // namespace physcad::agent
