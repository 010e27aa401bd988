#pragma once

#include "physcad/common.hpp"
#include "physcad/geometry.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace physcad {

/// Placement of a cubic-voxel lattice.
struct GridFrame {
    Vec3 origin = Vec3::Zero();
    double spacing = 1.0;
    std::array<int, 3> dims{0, 0, 0};

    std::size_t voxel_count() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
    std::size_t index(int i, int j, int k) const { return std::size_t(i) + std::size_t(dims[0]) * (j + std::size_t(dims[1]) * k); }
    std::array<int, 3> coords(std::size_t idx) const
    {
        int i = int(idx % dims[0]);
        std::size_t r = idx / dims[0];
        return {i, int(r % dims[1]), int(r / dims[1])};
    }
    Vec3 center(int i, int j, int k) const { return origin + spacing * Vec3(i + 0.5, j + 0.5, k + 0.5); }
    Vec3 center(std::size_t idx) const
    {
        auto c = coords(idx);
        return center(c[0], c[1], c[2]);
    }
    Box bounds() const { return {origin, origin + spacing * Vec3(dims[0], dims[1], dims[2])}; }
};

/// Voxel spacing for `bounds` with at least `resolution` voxels along the
/// longest axis. Prefers the smallest count in [resolution, 4*resolution]
/// whose spacing divides every axis extent, so lattice planes land on the
/// box faces; falls back to longest/resolution.
double aligned_spacing(const Box& bounds, int resolution);

/// Lattice covering `bounds` (origin at bounds.lo).
GridFrame frame_for(const Box& bounds, int resolution);

/// Lattice over `domain` extended by at least `margin_fraction` of each axis
/// extent on both sides, with lattice planes through the domain faces when
/// the spacing divides the extents.
GridFrame frame_with_margin(const Box& domain, int resolution, double margin_fraction);

struct VoxelGrid {
    GridFrame frame;
    std::vector<std::uint8_t> occupancy;

    bool occupied(std::size_t idx) const { return occupancy[idx] != 0; }
    bool occupied(int i, int j, int k) const { return occupancy[frame.index(i, j, k)] != 0; }
    std::size_t occupied_count() const;
    double voxel_volume() const { return frame.spacing * frame.spacing * frame.spacing; }
    double spacing() const { return frame.spacing; }
};

using PointPredicate = std::function<bool(const Vec3&)>;

/// A voxel is occupied iff its centre satisfies the predicate.
VoxelGrid voxelize(const PointPredicate& inside, const GridFrame& frame);
VoxelGrid voxelize(const PointPredicate& inside, const Box& bounds, int resolution);

struct ComponentLabeling {
    /// Per voxel: component id in [0, count) or -1 for empty voxels.
    std::vector<std::int32_t> labels;
    int count = 0;
};

/// Face-neighbour (6-connectivity) flood labelling. Ids are assigned in
/// voxel scan order.
ComponentLabeling connected_components(const VoxelGrid& grid);

struct TetMesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<std::uint32_t, 4>> tets;
    std::vector<std::uint32_t> element_voxel;
    double spacing = 0.0;

    double tet_volume(std::size_t e) const;
    double total_volume() const;
    Vec3 centroid(std::size_t e) const;
};

/// Six Kuhn tetrahedra per occupied voxel, all sharing the voxel's
/// (0,0,0)-(1,1,1) diagonal. Nodes are shared by lattice index and numbered in
/// ascending lattice order. Throws EmptyGeometry for an empty grid.
TetMesh tetrahedralize(const VoxelGrid& grid);

/// Nodes inside `selector` inflated by `tolerance` on every face, ascending ids.
std::vector<std::uint32_t> select_nodes(const TetMesh& mesh, const Box& selector, double tolerance);

/// Tet faces that occur exactly once, oriented outward, in mesh node ids.
std::vector<std::array<std::uint32_t, 3>> boundary_faces(const TetMesh& mesh);

/// Per node: true if the node lies on a boundary face.
std::vector<bool> boundary_node_mask(const TetMesh& mesh);

/// Boundary surface with compacted vertices.
SurfaceMesh surface_mesh(const TetMesh& mesh);

} // namespace physcad
