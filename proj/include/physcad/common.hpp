#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace physcad {

using Vec3 = Eigen::Vector3d;

/// Axis-aligned box in millimetres. Zero extent on an axis is legal
/// (plane, line and point selectors).
struct Box {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();

    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return 0.5 * (lo + hi); }
    double volume() const
    {
        Vec3 e = extent().cwiseMax(0.0);
        return e.x() * e.y() * e.z();
    }
    double longest() const { return extent().maxCoeff(); }

    bool contains(const Vec3& p) const
    {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }
    Box inflated(double d) const { return {lo.array() - d, hi.array() + d}; }
    Box inflated(const Vec3& d) const { return {lo - d, hi + d}; }
    Box scaled(double s) const { return {lo * s, hi * s}; }

    bool intersects(const Box& o) const
    {
        return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
    }
    Box intersection(const Box& o) const { return {lo.cwiseMax(o.lo), hi.cwiseMin(o.hi)}; }
    Box united(const Box& o) const { return {lo.cwiseMin(o.lo), hi.cwiseMax(o.hi)}; }
    bool empty() const { return (hi.array() < lo.array()).any(); }

    bool operator==(const Box& o) const { return lo == o.lo && hi == o.hi; }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed load case or geometry program. `path` points at the offending
/// field, e.g. `loads[0].spatial_selector_id`.
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path))
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class EmptyGeometry : public Error {
public:
    EmptyGeometry() : Error("geometry occupies no voxels") {}
};

} // namespace physcad
