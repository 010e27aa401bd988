#include "physcad/meshing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace physcad {

double aligned_spacing(const Box& bounds, int resolution)
{
    if (resolution < 1)
        throw std::invalid_argument("resolution must be positive");
    const Vec3 e = bounds.extent();
    if ((e.array() <= 0.0).any())
        throw std::invalid_argument("bounds must have positive extent");
    const double longest = e.maxCoeff();
    for (int n = resolution; n <= 4 * resolution; ++n) {
        const double h = longest / n;
        bool ok = true;
        for (int a = 0; a < 3 && ok; ++a) {
            double q = e[a] / h;
            ok = std::round(q) >= 1.0 && std::abs(q - std::round(q)) <= 1e-6 * std::max(1.0, q);
        }
        if (ok)
            return h;
    }
    return longest / resolution;
}

namespace {

int cells_for(double extent, double h)
{
    return std::max(1, static_cast<int>(std::ceil(extent / h - 1e-6)));
}

} // namespace

GridFrame frame_for(const Box& bounds, int resolution)
{
    GridFrame f;
    f.spacing = aligned_spacing(bounds, resolution);
    f.origin = bounds.lo;
    for (int a = 0; a < 3; ++a)
        f.dims[a] = cells_for(bounds.extent()[a], f.spacing);
    return f;
}

GridFrame frame_with_margin(const Box& domain, int resolution, double margin_fraction)
{
    GridFrame f;
    f.spacing = aligned_spacing(domain, resolution);
    const Vec3 e = domain.extent();
    for (int a = 0; a < 3; ++a) {
        int margin = std::max(1, static_cast<int>(std::ceil(margin_fraction * e[a] / f.spacing - 1e-6)));
        f.origin[a] = domain.lo[a] - margin * f.spacing;
        f.dims[a] = cells_for(e[a], f.spacing) + 2 * margin;
    }
    return f;
}

std::size_t VoxelGrid::occupied_count() const
{
    return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

VoxelGrid voxelize(const PointPredicate& inside, const GridFrame& frame)
{
    VoxelGrid g{frame, std::vector<std::uint8_t>(frame.voxel_count(), 0)};
    for (int k = 0; k < frame.dims[2]; ++k)
        for (int j = 0; j < frame.dims[1]; ++j)
            for (int i = 0; i < frame.dims[0]; ++i)
                if (inside(frame.center(i, j, k)))
                    g.occupancy[frame.index(i, j, k)] = 1;
    return g;
}

VoxelGrid voxelize(const PointPredicate& inside, const Box& bounds, int resolution)
{
    if (resolution < 8)
        throw std::invalid_argument("resolution must be at least 8");
    return voxelize(inside, frame_for(bounds, resolution));
}

ComponentLabeling connected_components(const VoxelGrid& grid)
{
    const auto& f = grid.frame;
    ComponentLabeling out;
    out.labels.assign(f.voxel_count(), -1);
    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < out.labels.size(); ++seed) {
        if (!grid.occupied(seed) || out.labels[seed] >= 0)
            continue;
        const int id = out.count++;
        out.labels[seed] = id;
        queue.push_back(seed);
        while (!queue.empty()) {
            std::size_t v = queue.front();
            queue.pop_front();
            auto c = f.coords(v);
            for (int axis = 0; axis < 3; ++axis)
                for (int step : {-1, 1}) {
                    auto n = c;
                    n[axis] += step;
                    if (n[axis] < 0 || n[axis] >= f.dims[axis])
                        continue;
                    std::size_t w = f.index(n[0], n[1], n[2]);
                    if (grid.occupied(w) && out.labels[w] < 0) {
                        out.labels[w] = id;
                        queue.push_back(w);
                    }
                }
        }
    }
    return out;
}

double TetMesh::tet_volume(std::size_t e) const
{
    const auto& t = tets[e];
    const Vec3& a = nodes[t[0]];
    return (nodes[t[1]] - a).dot((nodes[t[2]] - a).cross(nodes[t[3]] - a)) / 6.0;
}

double TetMesh::total_volume() const
{
    double v = 0.0;
    for (std::size_t e = 0; e < tets.size(); ++e)
        v += tet_volume(e);
    return v;
}

Vec3 TetMesh::centroid(std::size_t e) const
{
    const auto& t = tets[e];
    return 0.25 * (nodes[t[0]] + nodes[t[1]] + nodes[t[2]] + nodes[t[3]]);
}

namespace {

using Corner = std::array<int, 3>;

// Kuhn simplices of the unit cube: walk from (0,0,0) to (1,1,1) adding one
// axis at a time, one tet per axis permutation. Vertex order is fixed so each
// tet has positive signed volume.
std::array<std::array<Corner, 4>, 6> kuhn_tets()
{
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::array<std::array<Corner, 4>, 6> out{};
    for (int p = 0; p < 6; ++p) {
        Corner c{0, 0, 0};
        out[p][0] = c;
        for (int s = 0; s < 3; ++s) {
            c[perms[p][s]] = 1;
            out[p][s + 1] = c;
        }
        auto vec = [&](int k) { return Vec3(out[p][k][0], out[p][k][1], out[p][k][2]); };
        double vol = (vec(1) - vec(0)).dot((vec(2) - vec(0)).cross(vec(3) - vec(0)));
        if (vol < 0)
            std::swap(out[p][2], out[p][3]);
    }
    return out;
}

} // namespace

TetMesh tetrahedralize(const VoxelGrid& grid)
{
    const auto& f = grid.frame;
    const std::size_t lx = f.dims[0] + 1, ly = f.dims[1] + 1, lz = f.dims[2] + 1;
    auto lattice = [&](int i, int j, int k) { return std::size_t(i) + lx * (std::size_t(j) + ly * std::size_t(k)); };

    std::vector<std::int64_t> node_of(lx * ly * lz, -1);
    std::size_t occupied = 0;
    for (std::size_t v = 0; v < f.voxel_count(); ++v) {
        if (!grid.occupied(v))
            continue;
        ++occupied;
        auto c = f.coords(v);
        for (int dk = 0; dk < 2; ++dk)
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di)
                    node_of[lattice(c[0] + di, c[1] + dj, c[2] + dk)] = 0;
    }
    if (occupied == 0)
        throw EmptyGeometry();

    TetMesh mesh;
    mesh.spacing = f.spacing;
    for (std::size_t k = 0; k < lz; ++k)
        for (std::size_t j = 0; j < ly; ++j)
            for (std::size_t i = 0; i < lx; ++i) {
                auto& id = node_of[lattice(int(i), int(j), int(k))];
                if (id < 0)
                    continue;
                id = static_cast<std::int64_t>(mesh.nodes.size());
                mesh.nodes.push_back(f.origin + f.spacing * Vec3(double(i), double(j), double(k)));
            }

    static const auto kuhn = kuhn_tets();
    mesh.tets.reserve(6 * occupied);
    mesh.element_voxel.reserve(6 * occupied);
    for (std::size_t v = 0; v < f.voxel_count(); ++v) {
        if (!grid.occupied(v))
            continue;
        auto c = f.coords(v);
        for (const auto& tet : kuhn) {
            std::array<std::uint32_t, 4> t{};
            for (int q = 0; q < 4; ++q)
                t[q] = static_cast<std::uint32_t>(
                    node_of[lattice(c[0] + tet[q][0], c[1] + tet[q][1], c[2] + tet[q][2])]);
            mesh.tets.push_back(t);
            mesh.element_voxel.push_back(static_cast<std::uint32_t>(v));
        }
    }
    return mesh;
}

std::vector<std::uint32_t> select_nodes(const TetMesh& mesh, const Box& selector, double tolerance)
{
    const Box region = selector.inflated(tolerance);
    std::vector<std::uint32_t> out;
    for (std::uint32_t n = 0; n < mesh.nodes.size(); ++n)
        if (region.contains(mesh.nodes[n]))
            out.push_back(n);
    return out;
}

std::vector<std::array<std::uint32_t, 3>> boundary_faces(const TetMesh& mesh)
{
    struct Face {
        std::array<std::uint32_t, 3> key;
        std::array<std::uint32_t, 3> oriented;
    };
    static constexpr int local[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

    std::vector<Face> faces;
    faces.reserve(4 * mesh.tets.size());
    for (const auto& t : mesh.tets)
        for (const auto& lf : local) {
            Face f{{t[lf[0]], t[lf[1]], t[lf[2]]}, {t[lf[0]], t[lf[1]], t[lf[2]]}};
            std::sort(f.key.begin(), f.key.end());
            faces.push_back(f);
        }
    std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) { return a.key < b.key; });

    std::vector<std::array<std::uint32_t, 3>> out;
    for (std::size_t i = 0; i < faces.size();) {
        std::size_t j = i + 1;
        while (j < faces.size() && faces[j].key == faces[i].key)
            ++j;
        if (j - i == 1)
            out.push_back(faces[i].oriented);
        i = j;
    }
    return out;
}

std::vector<bool> boundary_node_mask(const TetMesh& mesh)
{
    std::vector<bool> mask(mesh.nodes.size(), false);
    for (const auto& f : boundary_faces(mesh))
        for (auto n : f)
            mask[n] = true;
    return mask;
}

SurfaceMesh surface_mesh(const TetMesh& mesh)
{
    auto faces = boundary_faces(mesh);
    std::vector<std::int64_t> remap(mesh.nodes.size(), -1);
    SurfaceMesh out;
    for (auto& f : faces)
        for (auto& n : f)
            if (remap[n] < 0) {
                remap[n] = static_cast<std::int64_t>(out.vertices.size());
                out.vertices.push_back(mesh.nodes[n]);
            }
    out.triangles.reserve(faces.size());
    for (const auto& f : faces)
        out.triangles.push_back({static_cast<std::uint32_t>(remap[f[0]]), static_cast<std::uint32_t>(remap[f[1]]),
                                 static_cast<std::uint32_t>(remap[f[2]])});
    return out;
}

} // namespace physcad
