#pragma once

#include "physcad/common.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace physcad {

struct SpatialSelector {
    std::string id;
    Box query;
};

struct BoundaryCondition {
    std::string selector_id;
    std::array<bool, 3> dof_lock{true, true, true};
};

enum class LoadKind { DistributedForce, PointForce };

struct Load {
    std::string selector_id;
    LoadKind kind = LoadKind::DistributedForce;
    double magnitude_newtons = 0.0;
    Vec3 direction = Vec3::UnitZ();
};

/// Structural design problem: design domain, selectors, supports and loads.
/// Lengths in mm, forces in N.
///
/// `keep_out` lists regions inside the domain where material is forbidden
/// (non-convex design spaces, through holes). It is serialized as the
/// optional `design_domain.keep_out` array and is empty for plain box domains.
struct LoadCase {
    std::string problem_id;
    std::string description;
    std::string units = "mm";
    Box domain;
    std::vector<Box> keep_out;
    std::vector<SpatialSelector> selectors;
    std::vector<BoundaryCondition> boundary_conditions;
    std::vector<Load> loads;

    const SpatialSelector& selector(std::string_view id) const;
    /// Design-space membership: inside the domain box and outside every keep-out.
    bool in_design_space(const Vec3& p) const;
};

struct VariantSpec {
    double geom_scale = 1.0;
    double force_scale = 1.0;

    /// Stable textual key, e.g. "g1.5_f0.75".
    std::string key() const;
    bool operator==(const VariantSpec&) const = default;
};

inline constexpr std::array<double, 5> kDefaultGeomScales{0.5, 0.75, 1.0, 1.5, 2.0};
inline constexpr std::array<double, 5> kDefaultForceScales{0.5, 0.75, 1.0, 1.5, 2.0};

/// Parses and validates a load-case document. Unknown fields are ignored.
/// Throws SchemaError naming the offending path.
LoadCase parse_load_case(std::string_view json_text);
LoadCase load_case_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const LoadCase& c);
std::string serialize_load_case(const LoadCase& c);

/// Checks every invariant; throws SchemaError on the first violation.
void validate_load_case(const LoadCase& c);

LoadCase apply_variant(const LoadCase& c, const VariantSpec& v);

/// Cartesian product ordered by case, then geometric scale, then force scale.
std::vector<std::pair<LoadCase, VariantSpec>> enumerate_variants(const std::vector<LoadCase>& cases,
                                                                 const std::vector<double>& geom_scales,
                                                                 const std::vector<double>& force_scales);

std::vector<VariantSpec> default_variant_specs();

/// The twenty benchmark load cases.
std::vector<LoadCase> builtin_cases();
/// Held-out case used only as the in-context example; never part of the benchmark set.
LoadCase example_case();

std::string to_string(LoadKind k);

} // namespace physcad
