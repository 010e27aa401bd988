#include "physcad/validators.hpp"

#include <fmt/format.h>

#include <array>
#include <functional>

namespace physcad {

namespace {

constexpr std::array<std::pair<FailureCategory, const char*>, 10> kCategoryNames{{
    {FailureCategory::None, "None"},
    {FailureCategory::Compile, "Compile"},
    {FailureCategory::DesignSpace, "DesignSpace"},
    {FailureCategory::FixArea, "FixArea"},
    {FailureCategory::LoadArea, "LoadArea"},
    {FailureCategory::Connectivity, "Connectivity"},
    {FailureCategory::Mesh, "Mesh"},
    {FailureCategory::FEA, "FEA"},
    {FailureCategory::IterationCap, "IterationCap"},
    {FailureCategory::OutOfRange, "OutOfRange"},
}};

// Voxel centres sit exactly half a spacing from lattice planes; a relative
// slack keeps round-off from dropping them out of face-flush selectors.
Box selector_window(const Box& b, double spacing)
{
    return b.inflated(0.5 * spacing * (1.0 + 1e-9));
}

} // namespace

std::string to_string(FailureCategory c)
{
    for (const auto& [k, name] : kCategoryNames)
        if (k == c)
            return name;
    return "None";
}

FailureCategory failure_category_from_string(std::string_view s)
{
    for (const auto& [k, name] : kCategoryNames)
        if (s == name)
            return k;
    throw std::invalid_argument(fmt::format("unknown failure category '{}'", s));
}

nlohmann::json to_json(const ValidationReport& r)
{
    nlohmann::json j;
    j["compiled"] = r.compiled;
    if (!r.compile_error.empty())
        j["compile_error"] = r.compile_error;
    j["design_space"] = {{"violated", r.design_space.violated},
                         {"outside_volume", r.design_space.outside_volume},
                         {"violation_ratio", r.design_space.violation_ratio}};
    j["fix_area_ok"] = r.fix_area_ok;
    j["load_area_ok"] = r.load_area_ok;
    j["empty_regions"] = r.empty_regions;
    j["connectivity"] = {{"component_count", r.connectivity.component_count},
                         {"all_regions_connected", r.connectivity.all_regions_connected}};
    j["meshable"] = r.meshable;
    j["fea"] = {{"attempted", r.fea.attempted},
                {"succeeded", r.fea.succeeded},
                {"safety_factor", r.fea.safety_factor},
                {"max_von_mises", r.fea.max_von_mises},
                {"in_target_range", r.fea.in_target_range},
                {"solver_iterations", r.fea.solver_iterations}};
    if (!r.fea.error.empty())
        j["fea"]["error"] = r.fea.error;
    j["volume_mm3"] = r.volume_mm3 ? nlohmann::json(*r.volume_mm3) : nlohmann::json(nullptr);
    j["face_count"] = r.face_count ? nlohmann::json(*r.face_count) : nlohmann::json(nullptr);
    j["verdict"] = r.valid() ? "valid" : r.checks_passed() ? "out_of_range" : "failed";
    j["category"] = to_string(r.category);
    return j;
}

DesignSpaceCheck check_design_space(const VoxelGrid& grid, const LoadCase& c)
{
    std::size_t outside = 0;
    for (std::size_t i = 0; i < grid.occupancy.size(); ++i)
        if (grid.occupancy[i] && !c.in_design_space(grid.frame.center(i)))
            ++outside;
    DesignSpaceCheck r;
    r.outside_volume = static_cast<double>(outside) * grid.voxel_volume();
    r.violation_ratio = r.outside_volume / c.domain.volume();
    r.violated = outside > 0;
    return r;
}

std::vector<std::size_t> region_voxels(const VoxelGrid& grid, const SpatialSelector& s)
{
    const Box window = selector_window(s.query, grid.spacing());
    const auto& f = grid.frame;
    // Only scan the index range overlapping the window.
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((window.lo[a] - f.origin[a]) / f.spacing - 0.5)));
        hi[a] = std::min(f.dims[a] - 1, static_cast<int>(std::ceil((window.hi[a] - f.origin[a]) / f.spacing - 0.5)));
    }
    std::vector<std::size_t> out;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i)
                if (grid.occupied(i, j, k) && window.contains(f.center(i, j, k)))
                    out.push_back(f.index(i, j, k));
    std::sort(out.begin(), out.end());
    return out;
}

bool check_region_coverage(const VoxelGrid& grid, const SpatialSelector& s)
{
    return !region_voxels(grid, s).empty();
}

ConnectivityCheck check_connectivity(const ComponentLabeling& labeling,
                                     const std::vector<std::vector<std::size_t>>& regions)
{
    ConnectivityCheck r;
    r.component_count = labeling.count;
    int id = -1;
    for (const auto& region : regions) {
        if (region.empty())
            return r;
        for (auto v : region) {
            const int l = labeling.labels[v];
            if (l < 0)
                return r;
            if (id < 0)
                id = l;
            else if (l != id)
                return r;
        }
    }
    r.all_regions_connected = id >= 0;
    return r;
}

namespace {

using FaceCounter = std::function<std::optional<int>()>;

Evaluation run_checks(const PointPredicate& inside, const LoadCase& c, const ValidationOptions& opts,
                      const FaceCounter& faces)
{
    opts.material.validate();
    Evaluation ev;
    ValidationReport& rep = ev.report;
    rep.compiled = true;

    GridFrame frame = frame_with_margin(c.domain, opts.resolution, opts.margin_fraction);
    ev.grid = voxelize(inside, frame);
    const VoxelGrid& grid = *ev.grid;
    const std::size_t occupied = grid.occupied_count();
    rep.volume_mm3 = static_cast<double>(occupied) * grid.voxel_volume();
    rep.face_count = faces();

    auto fail = [&](FailureCategory cat) {
        if (rep.category == FailureCategory::None)
            rep.category = cat;
    };

    rep.design_space = check_design_space(grid, c);
    if (rep.design_space.violated)
        fail(FailureCategory::DesignSpace);

    // Supports first, then loads, each in case order.
    std::vector<std::vector<std::size_t>> regions;
    bool fix_ok = true, load_ok = true;
    for (const auto& bc : c.boundary_conditions) {
        regions.push_back(region_voxels(grid, c.selector(bc.selector_id)));
        if (regions.back().empty()) {
            fix_ok = false;
            rep.empty_regions.push_back(bc.selector_id);
        }
    }
    for (const auto& load : c.loads) {
        regions.push_back(region_voxels(grid, c.selector(load.selector_id)));
        if (regions.back().empty()) {
            load_ok = false;
            rep.empty_regions.push_back(load.selector_id);
        }
    }
    rep.fix_area_ok = fix_ok;
    rep.load_area_ok = load_ok;
    if (!fix_ok)
        fail(FailureCategory::FixArea);
    if (!load_ok)
        fail(FailureCategory::LoadArea);

    ComponentLabeling labels = connected_components(grid);
    rep.connectivity = check_connectivity(labels, regions);
    if (fix_ok && load_ok && !rep.connectivity.all_regions_connected)
        fail(FailureCategory::Connectivity);

    if (occupied == 0) {
        fail(FailureCategory::Mesh);
        return ev;
    }
    auto mesh = std::make_shared<TetMesh>(tetrahedralize(grid));
    ev.mesh = mesh;
    ev.surface = surface_mesh(*mesh);
    rep.meshable = true;

    if (!fix_ok || !load_ok || !rep.connectivity.all_regions_connected)
        return ev;

    rep.fea.attempted = true;
    try {
        FemModel model = build_model(mesh, c, opts.material, 0.5 * grid.spacing());
        FemResult res = solve(model, opts.material);
        rep.fea.succeeded = true;
        rep.fea.safety_factor = res.safety_factor;
        rep.fea.max_von_mises = res.max_von_mises;
        rep.fea.solver_iterations = res.solver_iterations;
        rep.fea.in_target_range = opts.sf_range.contains(res.safety_factor);
        ev.fem = std::move(res);
    } catch (const FixAreaEmpty& e) {
        rep.fea.error = e.what();
        rep.fix_area_ok = false;
        fail(FailureCategory::FixArea);
    } catch (const LoadAreaEmpty& e) {
        rep.fea.error = e.what();
        rep.load_area_ok = false;
        fail(FailureCategory::LoadArea);
    } catch (const Error& e) {
        rep.fea.error = e.what();
        fail(FailureCategory::FEA);
    }
    return ev;
}

Evaluation compile_failure(std::string message)
{
    Evaluation ev;
    ev.report.compile_error = std::move(message);
    ev.report.category = FailureCategory::Compile;
    return ev;
}

} // namespace

Evaluation evaluate(const PointPredicate& inside, const LoadCase& c, const ValidationOptions& opts)
{
    return run_checks(inside, c, opts, [] { return std::optional<int>{}; });
}

Evaluation evaluate(const GeometryProgram& program, const LoadCase& c, const ValidationOptions& opts)
{
    return run_checks([&](const Vec3& p) { return program.contains(p); }, c, opts,
                      [&] { return std::optional<int>{boundary_face_count(program)}; });
}

Evaluation evaluate_source(std::string_view program_json, const LoadCase& c, const ValidationOptions& opts)
{
    std::optional<GeometryProgram> program;
    try {
        program.emplace(GeometryProgram::parse(program_json));
    } catch (const Error& e) {
        return compile_failure(e.what());
    }
    return evaluate(*program, c, opts);
}

Evaluation evaluate_stl(std::span<const std::uint8_t> stl_bytes, const LoadCase& c, const ValidationOptions& opts)
{
    SurfaceMesh stl;
    try {
        stl = load_stl(stl_bytes);
        require_watertight(stl);
    } catch (const Error& e) {
        return compile_failure(e.what());
    }
    MeshContainment inside(stl);
    return run_checks(inside, c, opts,
                      [&] { return std::optional<int>{count_faces(stl)}; });
}

ValidationReport validate(const GeometryProgram& program, const LoadCase& c, const ValidationOptions& opts)
{
    return evaluate(program, c, opts).report;
}

} // namespace physcad
