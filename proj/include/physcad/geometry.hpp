#pragma once

#include "physcad/common.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace physcad {

// ---------------------------------------------------------------------------
// CSG geometry programs
//
// A program is a tree of primitives combined by boolean nodes. Membership
// tests use non-strict inequalities, so points exactly on a primitive's
// surface count as inside; after boolean combination a boundary point may
// resolve either way.
// ---------------------------------------------------------------------------

struct BoxPrim {
    Vec3 min, max;
};

struct CylinderPrim {
    Vec3 p0, p1;
    double radius = 0.0;
};

struct SpherePrim {
    Vec3 center;
    double radius = 0.0;
};

enum class ExtrudePlane { XY, YZ, ZX };

/// Prism: polygon in the given plane, swept along the plane normal from lo to hi.
/// For XY the polygon coordinates are (x, y) and the sweep is along z; YZ uses
/// (y, z) along x; ZX uses (z, x) along y.
struct ExtrudePrim {
    ExtrudePlane plane = ExtrudePlane::XY;
    std::vector<Eigen::Vector2d> polygon;
    double lo = 0.0, hi = 0.0;
};

enum class BoolOp { Union, Difference, Intersection };

struct CsgNode;

struct BooleanNode {
    BoolOp op = BoolOp::Union;
    std::vector<CsgNode> children;
};

struct CsgNode {
    std::variant<BoxPrim, CylinderPrim, SpherePrim, ExtrudePrim, BooleanNode> value;
};

class GeometryProgram {
public:
    /// Validates the tree; throws SchemaError with a JSON-path style location.
    explicit GeometryProgram(CsgNode root);

    static GeometryProgram from_json(const nlohmann::json& j);
    static GeometryProgram parse(std::string_view json_text);

    const CsgNode& root() const { return root_; }
    nlohmann::json to_json() const;

    /// Point membership. Difference is the first child minus the union of the rest.
    bool contains(const Vec3& p) const;

    /// Conservative axis-aligned bounds of the solid.
    Box bounds() const;

    std::size_t primitive_count() const;

private:
    CsgNode root_;
};

/// Occupied-voxel count times voxel volume over the program's bounding box.
/// `resolution` is the voxel count along the longest bounding-box axis (>= 8).
/// Throws EmptyGeometry when no voxel centre lies inside the solid.
double estimate_volume(const GeometryProgram& program, int resolution);

/// Face count of a CSG solid: primitive surface patches (box sides, cylinder
/// side and caps, sphere, prism sides and caps) that carry part of the final
/// boundary. Each patch is sampled on a `samples` x `samples` grid; a sample is
/// on the boundary when membership differs on the two sides of the patch.
/// Coplanar patches of different primitives are not merged.
int boundary_face_count(const GeometryProgram& program, int samples = 12);

// ---------------------------------------------------------------------------
// Surface meshes
// ---------------------------------------------------------------------------

struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    bool empty() const { return triangles.empty(); }
    Vec3 normal(std::size_t t) const;
    double area(std::size_t t) const;
};

class FormatError : public Error {
public:
    using Error::Error;
};
class EmptyMesh : public Error {
public:
    EmptyMesh() : Error("mesh has no non-degenerate triangles") {}
};
class NotWatertight : public Error {
public:
    using Error::Error;
};

inline constexpr double kDefaultCreaseAngle = 0.35;

/// Number of smooth patches: adjacent triangles merge iff the angle between
/// their normals is below `crease_angle` (radians).
int count_faces(const SurfaceMesh& mesh, double crease_angle = kDefaultCreaseAngle);

/// Binary or ASCII STL. Vertices are deduplicated by exact coordinate match
/// and degenerate triangles are dropped.
SurfaceMesh load_stl(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_stl_binary(const SurfaceMesh& mesh);

/// Throws NotWatertight unless every edge is shared by exactly two triangles.
void require_watertight(const SurfaceMesh& mesh);

/// Ray-crossing parity along +x with a fixed tiny perturbation of the ray
/// origin so rays never graze edges or vertices. Checks watertightness first.
bool point_in_mesh(const SurfaceMesh& mesh, const Vec3& p);

/// Reusable form of point_in_mesh: validates the mesh once. Keeps a reference
/// to `mesh`, which must outlive it.
class MeshContainment {
public:
    explicit MeshContainment(const SurfaceMesh& mesh);
    bool operator()(const Vec3& p) const;

private:
    const SurfaceMesh* mesh_;
    Box bounds_;
    double eps_ = 0.0;
};

} // namespace physcad
