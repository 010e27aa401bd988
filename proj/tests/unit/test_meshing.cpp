#include "common/fixtures.hpp"

#include "physcad/meshing.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <set>

using namespace physcad;
using physcad::testing::box;

namespace {

VoxelGrid random_grid(std::mt19937& rng, int n, double fill)
{
    VoxelGrid g;
    g.frame.spacing = 1.0;
    g.frame.dims = {n, n, n};
    std::bernoulli_distribution occ(fill);
    g.occupancy.resize(g.frame.voxel_count());
    for (auto& v : g.occupancy)
        v = occ(rng);
    return g;
}

/// Breadth-first search over face neighbours: the reference partition.
std::vector<int> bfs_labels(const VoxelGrid& g, int& count)
{
    const auto& f = g.frame;
    std::vector<int> label(g.occupancy.size(), -1);
    count = 0;
    for (std::size_t s = 0; s < g.occupancy.size(); ++s) {
        if (!g.occupancy[s] || label[s] >= 0)
            continue;
        std::queue<std::size_t> q;
        q.push(s);
        label[s] = count;
        while (!q.empty()) {
            auto c = f.coords(q.front());
            q.pop();
            const int d[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
            for (auto& o : d) {
                int i = c[0] + o[0], j = c[1] + o[1], k = c[2] + o[2];
                if (i < 0 || j < 0 || k < 0 || i >= f.dims[0] || j >= f.dims[1] || k >= f.dims[2])
                    continue;
                auto n = f.index(i, j, k);
                if (g.occupancy[n] && label[n] < 0) {
                    label[n] = count;
                    q.push(n);
                }
            }
        }
        ++count;
    }
    return label;
}

/// Same partition up to relabelling.
bool same_partition(const std::vector<std::int32_t>& a, const std::vector<int>& b)
{
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] < 0) != (b[i] < 0))
            return false;
        if (a[i] < 0)
            continue;
        auto [it1, new1] = ab.emplace(a[i], b[i]);
        auto [it2, new2] = ba.emplace(b[i], a[i]);
        if (it1->second != b[i] || it2->second != a[i])
            return false;
    }
    return true;
}

std::array<std::uint32_t, 3> sorted(std::array<std::uint32_t, 3> f)
{
    std::sort(f.begin(), f.end());
    return f;
}

} // namespace

TEST_SUITE("meshing")
{
    TEST_CASE("aligned spacing lands lattice planes on the box faces")
    {
        for (Box b : {box(0, 0, 0, 400, 40, 40), box(0, 0, 0, 120, 30, 60), box(0, 0, 0, 10, 10, 100),
                      box(0, 0, 0, 600, 100, 200)}) {
            for (int res : {24, 40, 48, 80}) {
                double h = aligned_spacing(b, res);
                CHECK(b.longest() / h >= res - 1e-9);
                for (int a = 0; a < 3; ++a) {
                    double n = b.extent()[a] / h;
                    CHECK(std::abs(n - std::round(n)) < 1e-9);
                }
            }
        }
        // No divisor in range: falls back to longest / resolution.
        Box odd = box(0, 0, 0, 100, std::sqrt(2.0), 1);
        CHECK(aligned_spacing(odd, 10) == doctest::Approx(10.0));
    }

    TEST_CASE("frame with margin contains the domain with planes on its faces")
    {
        Box d = box(0, 0, 0, 120, 30, 60);
        GridFrame f = frame_with_margin(d, 48, 0.1);
        Box fb = f.bounds();
        for (int a = 0; a < 3; ++a) {
            CHECK(fb.lo[a] <= d.lo[a] - 0.1 * d.extent()[a] + 1e-9);
            CHECK(fb.hi[a] >= d.hi[a] + 0.1 * d.extent()[a] - 1e-9);
            double n = (d.lo[a] - f.origin[a]) / f.spacing;
            CHECK(std::abs(n - std::round(n)) < 1e-9);
        }
    }

    TEST_CASE("voxelization counts voxel centres")
    {
        auto g = voxelize([](const Vec3& p) { return p.x() < 5.0; }, box(0, 0, 0, 10, 10, 10), 10);
        CHECK(g.frame.dims == std::array<int, 3>{10, 10, 10});
        CHECK(g.occupied_count() == 500);
        CHECK(g.voxel_volume() == doctest::Approx(1.0));
    }

    TEST_CASE("connected components match breadth-first search")
    {
        std::mt19937 rng(12345);
        for (int trial = 0; trial < 60; ++trial) {
            auto g = random_grid(rng, 16, trial % 3 == 0 ? 0.3 : 0.5);
            int expect = 0;
            auto ref = bfs_labels(g, expect);
            auto lab = connected_components(g);
            CHECK(lab.count == expect);
            CHECK(same_partition(lab.labels, ref));
        }
    }

    TEST_CASE("component ids follow scan order")
    {
        VoxelGrid g;
        g.frame.dims = {5, 1, 1};
        g.occupancy = {1, 0, 1, 1, 0};
        auto lab = connected_components(g);
        CHECK(lab.count == 2);
        CHECK(lab.labels == std::vector<std::int32_t>{0, -1, 1, 1, -1});
    }

    TEST_CASE("kuhn tetrahedra tile each voxel and conform across neighbours")
    {
        std::mt19937 rng(99);
        for (int trial = 0; trial < 10; ++trial) {
            auto g = random_grid(rng, 6, 0.6);
            g.frame.spacing = 2.5;
            if (g.occupied_count() == 0)
                continue;
            TetMesh m = tetrahedralize(g);
            CHECK(m.tets.size() == 6 * g.occupied_count());
            CHECK(m.total_volume() == doctest::Approx(g.occupied_count() * g.voxel_volume()));
            for (std::size_t e = 0; e < m.tets.size(); ++e)
                CHECK(m.tet_volume(e) == doctest::Approx(g.voxel_volume() / 6.0));

            // Every triangular face is shared by at most two tets: no hanging
            // faces across voxel boundaries.
            std::map<std::array<std::uint32_t, 3>, int> faces;
            for (const auto& t : m.tets)
                for (int skip = 0; skip < 4; ++skip) {
                    std::array<std::uint32_t, 3> f{};
                    int n = 0;
                    for (int i = 0; i < 4; ++i)
                        if (i != skip)
                            f[n++] = t[i];
                    ++faces[sorted(f)];
                }
            std::size_t once = 0;
            for (const auto& [f, n] : faces) {
                CHECK(n <= 2);
                once += n == 1;
            }
            CHECK(boundary_faces(m).size() == once);

            // Interior faces: each voxel face shared with an occupied
            // neighbour must be split the same way by both voxels.
            const auto& fr = g.frame;
            std::size_t exposed = 0;
            for (std::size_t v = 0; v < g.occupancy.size(); ++v) {
                if (!g.occupancy[v])
                    continue;
                auto c = fr.coords(v);
                for (int a = 0; a < 3; ++a)
                    for (int s : {-1, 1}) {
                        auto n = c;
                        n[a] += s;
                        bool occ = n[a] >= 0 && n[a] < fr.dims[a] && g.occupied(n[0], n[1], n[2]);
                        exposed += !occ;
                    }
            }
            CHECK(once == 2 * exposed);
        }
    }

    TEST_CASE("single voxel mesh")
    {
        auto g = voxelize([](const Vec3&) { return true; }, box(0, 0, 0, 1, 1, 1), 8);
        VoxelGrid one;
        one.frame.spacing = 1;
        one.frame.dims = {1, 1, 1};
        one.occupancy = {1};
        TetMesh m = tetrahedralize(one);
        CHECK(m.nodes.size() == 8);
        CHECK(m.tets.size() == 6);
        auto bf = boundary_faces(m);
        CHECK(bf.size() == 12);
        // Outward orientation: normal points away from the cube centre.
        for (const auto& f : bf) {
            Vec3 a = m.nodes[f[0]], b = m.nodes[f[1]], c = m.nodes[f[2]];
            Vec3 n = (b - a).cross(c - a);
            CHECK(n.dot((a + b + c) / 3.0 - Vec3(0.5, 0.5, 0.5)) > 0.0);
        }
        auto mask = boundary_node_mask(m);
        CHECK(std::count(mask.begin(), mask.end(), true) == 8);
        CHECK(g.occupied_count() == 512);
        VoxelGrid empty = one;
        empty.occupancy = {0};
        CHECK_THROWS_AS(tetrahedralize(empty), EmptyGeometry);
    }

    TEST_CASE("node selection")
    {
        auto g = voxelize([](const Vec3&) { return true; }, box(0, 0, 0, 8, 8, 8), 8);
        TetMesh m = tetrahedralize(g);
        CHECK(m.nodes.size() == 729);
        auto face = select_nodes(m, box(0, 0, 0, 0, 8, 8), 1e-6);
        CHECK(face.size() == 81);
        CHECK(std::is_sorted(face.begin(), face.end()));
        for (auto n : face)
            CHECK(m.nodes[n].x() == doctest::Approx(0.0));
        CHECK(select_nodes(m, box(2, 2, 2, 2, 2, 2), 1e-6).size() == 1);
        CHECK(select_nodes(m, box(0.4, 0.4, 0.4, 0.6, 0.6, 0.6), 1e-6).empty());
    }
}
