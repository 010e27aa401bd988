#include "physcad/geometry.hpp"
#include "physcad/meshing.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace physcad {

using nlohmann::json;

namespace {

// -- parsing ----------------------------------------------------------------

Vec3 parse_point(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 3)
        throw SchemaError(path, "expected [x, y, z]");
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
        if (!j[a].is_number())
            throw SchemaError(fmt::format("{}[{}]", path, a), "expected a number");
        p[a] = j[a].get<double>();
    }
    if (!p.allFinite())
        throw SchemaError(path, "non-finite coordinate");
    return p;
}

const json& field(const json& j, const char* key, const std::string& path)
{
    auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(path + "." + key, "missing field");
    return *it;
}

double number(const json& j, const char* key, const std::string& path)
{
    const json& v = field(j, key, path);
    if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw SchemaError(path + "." + key, "expected a finite number");
    return v.get<double>();
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

int orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    double v = cross2(b - a, c - a);
    return (v > 0) - (v < 0);
}

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p)
{
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y()
           && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2)
{
    int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2), o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4)
        return true;
    return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2))
           || (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

bool polygon_is_simple(const std::vector<Eigen::Vector2d>& poly)
{
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((poly[i] - poly[(i + 1) % n]).norm() == 0.0)
            return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent)
                continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        area2 += cross2(poly[i], poly[(i + 1) % n]);
    return std::abs(area2) > 0.0;
}

CsgNode parse_node(const json& j, const std::string& path)
{
    if (!j.is_object())
        throw SchemaError(path, "expected a node object");
    const json& opj = field(j, "op", path);
    if (!opj.is_string())
        throw SchemaError(path + ".op", "expected a string");
    const auto op = opj.get<std::string>();

    if (op == "box")
        return {BoxPrim{parse_point(field(j, "min", path), path + ".min"),
                        parse_point(field(j, "max", path), path + ".max")}};
    if (op == "cylinder")
        return {CylinderPrim{parse_point(field(j, "p0", path), path + ".p0"),
                             parse_point(field(j, "p1", path), path + ".p1"), number(j, "radius", path)}};
    if (op == "sphere")
        return {SpherePrim{parse_point(field(j, "center", path), path + ".center"), number(j, "radius", path)}};
    if (op == "extrude") {
        ExtrudePrim e;
        const json& pl = field(j, "plane", path);
        auto plane = pl.is_string() ? pl.get<std::string>() : std::string{};
        if (plane == "xy")
            e.plane = ExtrudePlane::XY;
        else if (plane == "yz")
            e.plane = ExtrudePlane::YZ;
        else if (plane == "zx")
            e.plane = ExtrudePlane::ZX;
        else
            throw SchemaError(path + ".plane", "expected one of xy, yz, zx");
        const json& poly = field(j, "polygon", path);
        if (!poly.is_array())
            throw SchemaError(path + ".polygon", "expected an array of [u, v]");
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const json& v = poly[i];
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw SchemaError(fmt::format("{}.polygon[{}]", path, i), "expected [u, v]");
            e.polygon.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
        e.lo = number(j, "lo", path);
        e.hi = number(j, "hi", path);
        return {std::move(e)};
    }

    BooleanNode b;
    if (op == "union")
        b.op = BoolOp::Union;
    else if (op == "difference")
        b.op = BoolOp::Difference;
    else if (op == "intersection")
        b.op = BoolOp::Intersection;
    else
        throw SchemaError(path + ".op", fmt::format("unknown op '{}'", op));
    const json& kids = field(j, "children", path);
    if (!kids.is_array())
        throw SchemaError(path + ".children", "expected an array");
    for (std::size_t i = 0; i < kids.size(); ++i)
        b.children.push_back(parse_node(kids[i], fmt::format("{}.children[{}]", path, i)));
    return {std::move(b)};
}

void validate_node(const CsgNode& n, const std::string& path)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BoxPrim>) {
                if (((v.max - v.min).array() <= 0.0).any())
                    throw SchemaError(path, "box must have max > min on every axis");
            } else if constexpr (std::is_same_v<T, CylinderPrim>) {
                if (!(v.radius > 0.0))
                    throw SchemaError(path + ".radius", "radius must be positive");
                if ((v.p1 - v.p0).norm() <= 0.0)
                    throw SchemaError(path, "cylinder axis has zero length");
            } else if constexpr (std::is_same_v<T, SpherePrim>) {
                if (!(v.radius > 0.0))
                    throw SchemaError(path + ".radius", "radius must be positive");
            } else if constexpr (std::is_same_v<T, ExtrudePrim>) {
                if (v.polygon.size() < 3)
                    throw SchemaError(path + ".polygon", "polygon needs at least 3 vertices");
                for (const auto& p : v.polygon)
                    if (!p.allFinite())
                        throw SchemaError(path + ".polygon", "non-finite vertex");
                if (!polygon_is_simple(v.polygon))
                    throw SchemaError(path + ".polygon", "polygon is not simple");
                if (!(v.hi > v.lo))
                    throw SchemaError(path, "extrude needs hi > lo");
            } else {
                std::size_t min_children = v.op == BoolOp::Difference ? 2 : 1;
                if (v.children.size() < min_children)
                    throw SchemaError(path + ".children",
                                      fmt::format("needs at least {} child node(s)", min_children));
                for (std::size_t i = 0; i < v.children.size(); ++i)
                    validate_node(v.children[i], fmt::format("{}.children[{}]", path, i));
            }
        },
        n.value);
}

// -- evaluation -------------------------------------------------------------

Eigen::Vector3i extrude_axes(ExtrudePlane plane)
{
    // (u, v, w) -> world axis index
    switch (plane) {
    case ExtrudePlane::XY: return {0, 1, 2};
    case ExtrudePlane::YZ: return {1, 2, 0};
    case ExtrudePlane::ZX: return {2, 0, 1};
    }
    return {0, 1, 2};
}

bool point_in_polygon(const std::vector<Eigen::Vector2d>& poly, double u, double v)
{
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if (on_segment(a, b, {u, v}) && orient(a, b, {u, v}) == 0)
            return true;
        if ((a.y() > v) != (b.y() > v)) {
            double x = a.x() + (v - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (u < x)
                inside = !inside;
        }
    }
    return inside;
}

bool node_contains(const CsgNode& n, const Vec3& p)
{
    return std::visit(
        [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BoxPrim>) {
                return (p.array() >= v.min.array()).all() && (p.array() <= v.max.array()).all();
            } else if constexpr (std::is_same_v<T, CylinderPrim>) {
                Vec3 axis = v.p1 - v.p0;
                double len2 = axis.squaredNorm();
                double t = (p - v.p0).dot(axis) / len2;
                if (t < 0.0 || t > 1.0)
                    return false;
                return (p - (v.p0 + t * axis)).squaredNorm() <= v.radius * v.radius;
            } else if constexpr (std::is_same_v<T, SpherePrim>) {
                return (p - v.center).squaredNorm() <= v.radius * v.radius;
            } else if constexpr (std::is_same_v<T, ExtrudePrim>) {
                auto ax = extrude_axes(v.plane);
                double w = p[ax[2]];
                if (w < v.lo || w > v.hi)
                    return false;
                return point_in_polygon(v.polygon, p[ax[0]], p[ax[1]]);
            } else {
                switch (v.op) {
                case BoolOp::Union:
                    for (const auto& c : v.children)
                        if (node_contains(c, p))
                            return true;
                    return false;
                case BoolOp::Intersection:
                    for (const auto& c : v.children)
                        if (!node_contains(c, p))
                            return false;
                    return true;
                case BoolOp::Difference:
                    if (!node_contains(v.children.front(), p))
                        return false;
                    for (std::size_t i = 1; i < v.children.size(); ++i)
                        if (node_contains(v.children[i], p))
                            return false;
                    return true;
                }
                return false;
            }
        },
        n.value);
}

Box node_bounds(const CsgNode& n)
{
    return std::visit(
        [&](const auto& v) -> Box {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BoxPrim>) {
                return {v.min, v.max};
            } else if constexpr (std::is_same_v<T, CylinderPrim>) {
                Vec3 a = (v.p1 - v.p0).normalized();
                Vec3 e;
                for (int i = 0; i < 3; ++i)
                    e[i] = v.radius * std::sqrt(std::max(0.0, 1.0 - a[i] * a[i]));
                return {v.p0.cwiseMin(v.p1) - e, v.p0.cwiseMax(v.p1) + e};
            } else if constexpr (std::is_same_v<T, SpherePrim>) {
                return {v.center.array() - v.radius, v.center.array() + v.radius};
            } else if constexpr (std::is_same_v<T, ExtrudePrim>) {
                auto ax = extrude_axes(v.plane);
                Box b;
                b.lo[ax[0]] = b.hi[ax[0]] = v.polygon.front().x();
                b.lo[ax[1]] = b.hi[ax[1]] = v.polygon.front().y();
                for (const auto& q : v.polygon) {
                    b.lo[ax[0]] = std::min(b.lo[ax[0]], q.x());
                    b.hi[ax[0]] = std::max(b.hi[ax[0]], q.x());
                    b.lo[ax[1]] = std::min(b.lo[ax[1]], q.y());
                    b.hi[ax[1]] = std::max(b.hi[ax[1]], q.y());
                }
                b.lo[ax[2]] = v.lo;
                b.hi[ax[2]] = v.hi;
                return b;
            } else {
                Box b = node_bounds(v.children.front());
                if (v.op == BoolOp::Difference)
                    return b;
                for (std::size_t i = 1; i < v.children.size(); ++i) {
                    Box c = node_bounds(v.children[i]);
                    b = v.op == BoolOp::Union ? b.united(c) : b.intersection(c);
                }
                return b;
            }
        },
        n.value);
}

std::size_t node_primitives(const CsgNode& n)
{
    if (const auto* b = std::get_if<BooleanNode>(&n.value)) {
        std::size_t k = 0;
        for (const auto& c : b->children)
            k += node_primitives(c);
        return k;
    }
    return 1;
}

json point_json(const Vec3& p)
{
    return json::array({p.x(), p.y(), p.z()});
}

json node_json(const CsgNode& n)
{
    return std::visit(
        [&](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BoxPrim>) {
                return {{"op", "box"}, {"min", point_json(v.min)}, {"max", point_json(v.max)}};
            } else if constexpr (std::is_same_v<T, CylinderPrim>) {
                return {{"op", "cylinder"}, {"p0", point_json(v.p0)}, {"p1", point_json(v.p1)}, {"radius", v.radius}};
            } else if constexpr (std::is_same_v<T, SpherePrim>) {
                return {{"op", "sphere"}, {"center", point_json(v.center)}, {"radius", v.radius}};
            } else if constexpr (std::is_same_v<T, ExtrudePrim>) {
                static constexpr const char* names[] = {"xy", "yz", "zx"};
                json poly = json::array();
                for (const auto& q : v.polygon)
                    poly.push_back({q.x(), q.y()});
                return {{"op", "extrude"},
                        {"plane", names[static_cast<int>(v.plane)]},
                        {"polygon", std::move(poly)},
                        {"lo", v.lo},
                        {"hi", v.hi}};
            } else {
                static constexpr const char* names[] = {"union", "difference", "intersection"};
                json kids = json::array();
                for (const auto& c : v.children)
                    kids.push_back(node_json(c));
                return {{"op", names[static_cast<int>(v.op)]}, {"children", std::move(kids)}};
            }
        },
        n.value);
}

} // namespace

GeometryProgram::GeometryProgram(CsgNode root) : root_(std::move(root))
{
    validate_node(root_, "$");
}

GeometryProgram GeometryProgram::from_json(const json& j)
{
    return GeometryProgram(parse_node(j, "$"));
}

GeometryProgram GeometryProgram::parse(std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError("$", fmt::format("invalid JSON: {}", e.what()));
    }
    return from_json(j);
}

json GeometryProgram::to_json() const
{
    return node_json(root_);
}

bool GeometryProgram::contains(const Vec3& p) const
{
    return node_contains(root_, p);
}

Box GeometryProgram::bounds() const
{
    return node_bounds(root_);
}

std::size_t GeometryProgram::primitive_count() const
{
    return node_primitives(root_);
}

double estimate_volume(const GeometryProgram& program, int resolution)
{
    if (resolution < 8)
        throw std::invalid_argument("resolution must be at least 8");
    Box b = program.bounds();
    if (b.empty() || (b.extent().array() <= 0.0).any())
        throw EmptyGeometry();
    VoxelGrid grid = voxelize([&](const Vec3& p) { return program.contains(p); }, b, resolution);
    std::size_t n = grid.occupied_count();
    if (n == 0)
        throw EmptyGeometry();
    return static_cast<double>(n) * grid.voxel_volume();
}

namespace {

struct PatchSample {
    Vec3 point;
    Vec3 normal;
};
using Patch = std::vector<PatchSample>;

std::pair<Vec3, Vec3> orthonormal_pair(const Vec3& d)
{
    Vec3 helper = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 e1 = d.cross(helper).normalized();
    return {e1, d.cross(e1)};
}

void collect_patches(const CsgNode& n, int ns, std::vector<Patch>& out)
{
    const double pi = std::acos(-1.0);
    auto frac = [ns](int i) { return (i + 0.5) / ns; };
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BoxPrim>) {
                for (int a = 0; a < 3; ++a)
                    for (int side = 0; side < 2; ++side) {
                        const int b = (a + 1) % 3, c = (a + 2) % 3;
                        Patch patch;
                        for (int i = 0; i < ns; ++i)
                            for (int j = 0; j < ns; ++j) {
                                Vec3 p;
                                p[a] = side ? v.max[a] : v.min[a];
                                p[b] = v.min[b] + frac(i) * (v.max[b] - v.min[b]);
                                p[c] = v.min[c] + frac(j) * (v.max[c] - v.min[c]);
                                patch.push_back({p, Vec3::Unit(a)});
                            }
                        out.push_back(std::move(patch));
                    }
            } else if constexpr (std::is_same_v<T, CylinderPrim>) {
                const Vec3 axis = v.p1 - v.p0;
                const Vec3 d = axis.normalized();
                auto [e1, e2] = orthonormal_pair(d);
                Patch side, cap0, cap1;
                for (int i = 0; i < ns; ++i)
                    for (int j = 0; j < ns; ++j) {
                        const double th = 2.0 * pi * frac(i);
                        const Vec3 radial = std::cos(th) * e1 + std::sin(th) * e2;
                        side.push_back({v.p0 + frac(j) * axis + v.radius * radial, radial});
                        const double r = v.radius * std::sqrt(frac(j));
                        cap0.push_back({v.p0 + r * radial, d});
                        cap1.push_back({v.p1 + r * radial, d});
                    }
                out.push_back(std::move(side));
                out.push_back(std::move(cap0));
                out.push_back(std::move(cap1));
            } else if constexpr (std::is_same_v<T, SpherePrim>) {
                Patch patch;
                for (int i = 0; i < ns; ++i)
                    for (int j = 0; j < ns; ++j) {
                        const double z = 1.0 - 2.0 * frac(i);
                        const double phi = 2.0 * pi * frac(j);
                        const double rho = std::sqrt(1.0 - z * z);
                        Vec3 dir(rho * std::cos(phi), rho * std::sin(phi), z);
                        patch.push_back({v.center + v.radius * dir, dir});
                    }
                out.push_back(std::move(patch));
            } else if constexpr (std::is_same_v<T, ExtrudePrim>) {
                const auto ax = extrude_axes(v.plane);
                auto lift = [&](double u, double w2, double w) {
                    Vec3 p;
                    p[ax[0]] = u;
                    p[ax[1]] = w2;
                    p[ax[2]] = w;
                    return p;
                };
                const std::size_t m = v.polygon.size();
                for (std::size_t k = 0; k < m; ++k) {
                    const auto& a = v.polygon[k];
                    const auto& b = v.polygon[(k + 1) % m];
                    const Eigen::Vector2d e = b - a;
                    const Vec3 normal = lift(e.y(), -e.x(), 0.0).normalized();
                    Patch patch;
                    for (int i = 0; i < ns; ++i)
                        for (int j = 0; j < ns; ++j) {
                            const Eigen::Vector2d q = a + frac(i) * e;
                            patch.push_back({lift(q.x(), q.y(), v.lo + frac(j) * (v.hi - v.lo)), normal});
                        }
                    out.push_back(std::move(patch));
                }
                Eigen::Vector2d lo = v.polygon.front(), hi = v.polygon.front();
                for (const auto& q : v.polygon) {
                    lo = lo.cwiseMin(q);
                    hi = hi.cwiseMax(q);
                }
                Patch cap_lo, cap_hi;
                const int nc = 2 * ns;
                for (int i = 0; i < nc; ++i)
                    for (int j = 0; j < nc; ++j) {
                        const double u = lo.x() + (i + 0.5) / nc * (hi.x() - lo.x());
                        const double w2 = lo.y() + (j + 0.5) / nc * (hi.y() - lo.y());
                        if (!point_in_polygon(v.polygon, u, w2))
                            continue;
                        cap_lo.push_back({lift(u, w2, v.lo), Vec3::Unit(ax[2])});
                        cap_hi.push_back({lift(u, w2, v.hi), Vec3::Unit(ax[2])});
                    }
                out.push_back(std::move(cap_lo));
                out.push_back(std::move(cap_hi));
            } else {
                for (const auto& c : v.children)
                    collect_patches(c, ns, out);
            }
        },
        n.value);
}

} // namespace

int boundary_face_count(const GeometryProgram& program, int samples)
{
    if (samples < 2)
        throw std::invalid_argument("need at least 2 samples per patch axis");
    std::vector<Patch> patches;
    collect_patches(program.root(), samples, patches);
    const double eps = 1e-6 * std::max(1.0, program.bounds().longest());
    int count = 0;
    for (const auto& patch : patches)
        for (const auto& s : patch)
            if (program.contains(s.point + eps * s.normal) != program.contains(s.point - eps * s.normal)) {
                ++count;
                break;
            }
    return count;
}

// -- surface meshes -----------------------------------------------------------

Vec3 SurfaceMesh::normal(std::size_t t) const
{
    const auto& tri = triangles[t];
    Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
    double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double SurfaceMesh::area(std::size_t t) const
{
    const auto& tri = triangles[t];
    return 0.5 * (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]).norm();
}

namespace {

using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;

EdgeKey edge_key(std::uint32_t a, std::uint32_t b)
{
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

std::map<EdgeKey, std::vector<std::uint32_t>> edge_triangles(const SurfaceMesh& m)
{
    std::map<EdgeKey, std::vector<std::uint32_t>> edges;
    for (std::uint32_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tri = m.triangles[t];
        for (int k = 0; k < 3; ++k)
            edges[edge_key(tri[k], tri[(k + 1) % 3])].push_back(t);
    }
    return edges;
}

struct DisjointSets {
    std::vector<std::uint32_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

int count_faces(const SurfaceMesh& mesh, double crease_angle)
{
    if (mesh.triangles.empty())
        return 0;
    std::vector<Vec3> normals(mesh.triangles.size());
    for (std::size_t t = 0; t < normals.size(); ++t)
        normals[t] = mesh.normal(t);

    const double cos_limit = std::cos(crease_angle);
    DisjointSets sets(mesh.triangles.size());
    for (const auto& [edge, tris] : edge_triangles(mesh)) {
        for (std::size_t i = 0; i < tris.size(); ++i)
            for (std::size_t j = i + 1; j < tris.size(); ++j) {
                double c = normals[tris[i]].dot(normals[tris[j]]);
                if (c > cos_limit)
                    sets.unite(tris[i], tris[j]);
            }
    }
    int patches = 0;
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t)
        if (sets.find(t) == t)
            ++patches;
    return patches;
}

namespace {

struct MeshBuilder {
    std::map<std::array<double, 3>, std::uint32_t> index;
    SurfaceMesh mesh;

    std::uint32_t vertex(const Vec3& p)
    {
        std::array<double, 3> key{p.x(), p.y(), p.z()};
        auto [it, inserted] = index.emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted)
            mesh.vertices.push_back(p);
        return it->second;
    }

    void triangle(const Vec3& a, const Vec3& b, const Vec3& c)
    {
        if ((b - a).cross(c - a).norm() == 0.0)
            return;
        std::uint32_t ia = vertex(a), ib = vertex(b), ic = vertex(c);
        if (ia == ib || ib == ic || ia == ic)
            return;
        mesh.triangles.push_back({ia, ib, ic});
    }

    SurfaceMesh finish()
    {
        if (mesh.triangles.empty())
            throw EmptyMesh();
        return std::move(mesh);
    }
};

SurfaceMesh load_stl_binary(std::span<const std::uint8_t> bytes, std::uint32_t count)
{
    MeshBuilder b;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::uint8_t* rec = bytes.data() + 84 + 50 * static_cast<std::size_t>(t);
        Vec3 v[3];
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 3; ++a) {
                float f;
                std::memcpy(&f, rec + 12 + 12 * k + 4 * a, 4);
                if (!std::isfinite(f))
                    throw FormatError(fmt::format("non-finite coordinate in facet {}", t));
                v[k][a] = f;
            }
        b.triangle(v[0], v[1], v[2]);
    }
    return b.finish();
}

SurfaceMesh load_stl_ascii(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string tok;
    MeshBuilder b;
    std::vector<Vec3> pending;
    bool saw_facet = false;
    while (in >> tok) {
        if (tok == "facet") {
            saw_facet = true;
            if (!pending.empty())
                throw FormatError("facet with fewer than three vertices");
        } else if (tok == "vertex") {
            Vec3 p;
            if (!(in >> p.x() >> p.y() >> p.z()))
                throw FormatError("malformed vertex record");
            pending.push_back(p);
            if (pending.size() > 3)
                throw FormatError("facet with more than three vertices");
        } else if (tok == "endfacet") {
            if (pending.size() != 3)
                throw FormatError("facet without exactly three vertices");
            b.triangle(pending[0], pending[1], pending[2]);
            pending.clear();
        }
    }
    if (!saw_facet)
        throw FormatError("no facets in ASCII STL");
    if (!pending.empty())
        throw FormatError("unterminated facet");
    return b.finish();
}

} // namespace

SurfaceMesh load_stl(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 84) {
        std::uint32_t count;
        std::memcpy(&count, bytes.data() + 80, 4);
        if (bytes.size() == 84 + 50 * static_cast<std::size_t>(count))
            return load_stl_binary(bytes, count);
    }
    std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    auto start = text.find_first_not_of(" \t\r\n");
    if (start != std::string_view::npos && text.substr(start, 5) == "solid")
        return load_stl_ascii(text);
    throw FormatError("not a binary STL (size mismatch) nor ASCII STL");
}

std::vector<std::uint8_t> write_stl_binary(const SurfaceMesh& mesh)
{
    std::vector<std::uint8_t> out(84 + 50 * mesh.triangles.size(), 0);
    auto count = static_cast<std::uint32_t>(mesh.triangles.size());
    std::memcpy(out.data() + 80, &count, 4);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        std::uint8_t* rec = out.data() + 84 + 50 * t;
        Vec3 n = mesh.normal(t);
        float vals[12];
        for (int a = 0; a < 3; ++a)
            vals[a] = static_cast<float>(n[a]);
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 3; ++a)
                vals[3 + 3 * k + a] = static_cast<float>(mesh.vertices[mesh.triangles[t][k]][a]);
        std::memcpy(rec, vals, sizeof vals);
    }
    return out;
}

void require_watertight(const SurfaceMesh& mesh)
{
    for (const auto& [edge, tris] : edge_triangles(mesh))
        if (tris.size() != 2)
            throw NotWatertight(fmt::format("edge ({}, {}) is shared by {} triangle(s)", edge.first, edge.second,
                                            tris.size()));
}

MeshContainment::MeshContainment(const SurfaceMesh& mesh) : mesh_(&mesh)
{
    require_watertight(mesh);
    bounds_ = {mesh.vertices.front(), mesh.vertices.front()};
    for (const auto& v : mesh.vertices)
        bounds_ = bounds_.united({v, v});
    eps_ = 1e-9 * std::max(1.0, bounds_.extent().norm());
}

bool MeshContainment::operator()(const Vec3& p) const
{
    if (!bounds_.contains(p))
        return false;
    const double oy = p.y() + eps_ * 0.5772156649015329;
    const double oz = p.z() + eps_ * 0.6180339887498949;

    int crossings = 0;
    for (const auto& tri : mesh_->triangles) {
        const Vec3& a = mesh_->vertices[tri[0]];
        const Vec3& b = mesh_->vertices[tri[1]];
        const Vec3& c = mesh_->vertices[tri[2]];
        // Barycentric coordinates of (oy, oz) in the triangle's yz projection.
        double d = (b.y() - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (b.z() - a.z());
        if (d == 0.0)
            continue;
        double w1 = ((oy - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (oz - a.z())) / d;
        double w2 = ((b.y() - a.y()) * (oz - a.z()) - (oy - a.y()) * (b.z() - a.z())) / d;
        double w0 = 1.0 - w1 - w2;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0)
            continue;
        double x = w0 * a.x() + w1 * b.x() + w2 * c.x();
        if (x > p.x())
            ++crossings;
    }
    return crossings % 2 == 1;
}

bool point_in_mesh(const SurfaceMesh& mesh, const Vec3& p)
{
    return MeshContainment(mesh)(p);
}

} // namespace physcad
