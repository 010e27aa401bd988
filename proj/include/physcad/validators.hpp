#pragma once

#include "physcad/fem.hpp"
#include "physcad/geometry.hpp"
#include "physcad/loadcase.hpp"
#include "physcad/meshing.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace physcad {

/// Failure taxonomy. DesignSpace, Connectivity, FEA, LoadArea and FixArea are
/// the hard design failures; Compile and Mesh mark the earlier pipeline stages.
/// IterationCap (checks passed, safety factor never in range) and OutOfRange
/// (a reviewer accepted an out-of-range design) appear only in run summaries.
enum class FailureCategory {
    None,
    Compile,
    DesignSpace,
    FixArea,
    LoadArea,
    Connectivity,
    Mesh,
    FEA,
    IterationCap,
    OutOfRange
};

std::string to_string(FailureCategory c);
FailureCategory failure_category_from_string(std::string_view s);

struct DesignSpaceCheck {
    bool violated = false;
    double outside_volume = 0.0;  ///< mm^3
    double violation_ratio = 0.0; ///< outside volume / domain box volume
};

struct ConnectivityCheck {
    int component_count = 0;
    bool all_regions_connected = false;
};

struct FeaCheck {
    bool attempted = false;
    bool succeeded = false;
    double safety_factor = 0.0;
    double max_von_mises = 0.0;
    bool in_target_range = false;
    long solver_iterations = 0;
    std::string error;
};

struct SafetyRange {
    double lo = 2.0;
    double hi = 5.0;
    bool contains(double sf) const { return sf >= lo && sf <= hi; }
};

struct ValidationOptions {
    int resolution = 48;          ///< voxels along the longest domain axis
    double margin_fraction = 0.1; ///< grid extends this far beyond the domain
    SafetyRange sf_range;
    Material material;
};

struct ValidationReport {
    bool compiled = false;
    std::string compile_error;
    DesignSpaceCheck design_space;
    bool fix_area_ok = false;
    bool load_area_ok = false;
    std::vector<std::string> empty_regions; ///< selector ids with no material
    ConnectivityCheck connectivity;
    bool meshable = false;
    FeaCheck fea;
    std::optional<double> volume_mm3;
    std::optional<int> face_count;
    FailureCategory category = FailureCategory::None;

    /// Every deterministic check passed. The safety factor may still be out of range.
    bool checks_passed() const { return category == FailureCategory::None; }
    /// Checks passed and the safety factor is inside the target range.
    bool valid() const { return checks_passed() && fea.in_target_range; }
};

nlohmann::json to_json(const ValidationReport& r);

DesignSpaceCheck check_design_space(const VoxelGrid& grid, const LoadCase& c);

/// Occupied voxels whose centres lie in the selector box inflated by half a voxel.
std::vector<std::size_t> region_voxels(const VoxelGrid& grid, const SpatialSelector& s);

bool check_region_coverage(const VoxelGrid& grid, const SpatialSelector& s);

ConnectivityCheck check_connectivity(const ComponentLabeling& labeling,
                                     const std::vector<std::vector<std::size_t>>& regions);

/// Everything the pipeline produced for one design; stages not reached stay empty.
struct Evaluation {
    ValidationReport report;
    std::optional<VoxelGrid> grid;
    std::shared_ptr<const TetMesh> mesh;
    SurfaceMesh surface;
    std::optional<FemResult> fem;
};

/// Runs design-space, coverage and connectivity checks, then meshing and FEA.
/// FEA is skipped when a region is empty or disconnected; a design-space
/// violation alone does not stop it. The category is the first failure in the
/// order compile, design space, coverage, connectivity, mesh, FEA.
Evaluation evaluate(const PointPredicate& inside, const LoadCase& c, const ValidationOptions& opts);
Evaluation evaluate(const GeometryProgram& program, const LoadCase& c, const ValidationOptions& opts);

/// Compiles geometry-program JSON text first; a parse failure is a Compile failure.
Evaluation evaluate_source(std::string_view program_json, const LoadCase& c, const ValidationOptions& opts);

/// STL path: membership by ray parity on a watertight surface. Load failure
/// or a non-watertight mesh is a Compile failure.
Evaluation evaluate_stl(std::span<const std::uint8_t> stl_bytes, const LoadCase& c, const ValidationOptions& opts);

ValidationReport validate(const GeometryProgram& program, const LoadCase& c, const ValidationOptions& opts);

} // namespace physcad
