#pragma once

#include "physcad/geometry.hpp"
#include "physcad/loadcase.hpp"

#include <vector>

namespace physcad::agent {

/// Deterministic non-language-model designer: a block connecting every
/// selector region, thinned by a factor t in (0, 1] across the axes
/// perpendicular to the dominant load direction.
struct HeuristicPlan {
    Box hull;
    int dominant_axis = 2;
    /// Axes other than the dominant one on which every selector's range
    /// overlaps; only these are thinned, so each region stays covered unless
    /// a keep-out box removes the thinned material over it.
    std::vector<int> scalable_axes;
    Vec3 pivot = Vec3::Zero(); ///< centre of the common selector range per axis
    std::vector<Box> keep_out;
};

/// Hull = bounding box of all boundary-condition and load selectors clipped
/// to the domain. Axes on which that box spans less than 10% of the domain
/// are widened to the full domain extent.
HeuristicPlan plan_heuristic(const LoadCase& c);

/// The hull thinned by t about the pivot, minus every keep-out box.
GeometryProgram heuristic_program(const HeuristicPlan& plan, double t);

/// Bisection on t. Too stiff (SF above range) shrinks, too weak or a hard
/// failure grows.
class ThicknessSearch {
public:
    double current() const { return t_; }
    /// Feeds back the outcome of `current()` and moves to the next value.
    void too_stiff();
    void too_weak();
    /// True once the full hull was too weak: nothing thicker exists.
    bool exhausted() const { return exhausted_; }

private:
    double lo_ = 0.0, hi_ = 1.0, t_ = 1.0;
    bool exhausted_ = false;
};

} // namespace physcad::agent
