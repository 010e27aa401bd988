#include "physcad/loadcase.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

namespace physcad {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& path)
{
    if (!obj.is_object())
        throw SchemaError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        throw SchemaError(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

double require_number(const json& obj, const char* key, const std::string& path)
{
    const json& v = require(obj, key, path);
    if (!v.is_number())
        throw SchemaError(path + "." + key, "expected a number");
    return v.get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& path)
{
    const json& v = require(obj, key, path);
    if (!v.is_string())
        throw SchemaError(path.empty() ? key : path + "." + key, "expected a string");
    return v.get<std::string>();
}

Box parse_box(const json& obj, const std::string& path)
{
    Box b;
    static constexpr const char* lo_keys[] = {"x_min", "y_min", "z_min"};
    static constexpr const char* hi_keys[] = {"x_max", "y_max", "z_max"};
    for (int a = 0; a < 3; ++a) {
        b.lo[a] = require_number(obj, lo_keys[a], path);
        b.hi[a] = require_number(obj, hi_keys[a], path);
    }
    return b;
}

json box_json(const Box& b)
{
    return {{"x_min", b.lo.x()}, {"x_max", b.hi.x()}, {"y_min", b.lo.y()},
            {"y_max", b.hi.y()}, {"z_min", b.lo.z()}, {"z_max", b.hi.z()}};
}

Vec3 parse_direction(const json& v, const std::string& path)
{
    Vec3 d;
    if (v.is_array() && v.size() == 3) {
        for (int a = 0; a < 3; ++a) {
            if (!v[a].is_number())
                throw SchemaError(fmt::format("{}[{}]", path, a), "expected a number");
            d[a] = v[a].get<double>();
        }
    } else if (v.is_object()) {
        d = {require_number(v, "x", path), require_number(v, "y", path), require_number(v, "z", path)};
    } else {
        throw SchemaError(path, "expected [x, y, z]");
    }
    return d;
}

LoadKind parse_load_kind(const std::string& s, const std::string& path)
{
    if (s == "distributed_force")
        return LoadKind::DistributedForce;
    if (s == "point_force")
        return LoadKind::PointForce;
    throw SchemaError(path, fmt::format("unknown load type '{}'", s));
}

std::string fmt_scale(double s)
{
    return fmt::format("{:g}", s);
}

} // namespace

std::string to_string(LoadKind k)
{
    return k == LoadKind::DistributedForce ? "distributed_force" : "point_force";
}

std::string VariantSpec::key() const
{
    return "g" + fmt_scale(geom_scale) + "_f" + fmt_scale(force_scale);
}

const SpatialSelector& LoadCase::selector(std::string_view id) const
{
    for (const auto& s : selectors)
        if (s.id == id)
            return s;
    throw SchemaError("spatial_selectors", fmt::format("no selector '{}'", id));
}

bool LoadCase::in_design_space(const Vec3& p) const
{
    if (!domain.contains(p))
        return false;
    for (const auto& k : keep_out)
        if ((p.array() > k.lo.array()).all() && (p.array() < k.hi.array()).all())
            return false;
    return true;
}

void validate_load_case(const LoadCase& c)
{
    if (c.units != "mm")
        throw SchemaError("design_domain.units", fmt::format("unsupported unit '{}', only mm", c.units));
    if ((c.domain.extent().array() <= 0.0).any())
        throw SchemaError("design_domain.bounds", "domain must have positive extent on every axis");

    for (std::size_t i = 0; i < c.keep_out.size(); ++i)
        if ((c.keep_out[i].extent().array() <= 0.0).any())
            throw SchemaError(fmt::format("design_domain.keep_out[{}]", i), "keep-out must have positive extent");

    std::set<std::string> ids;
    for (std::size_t i = 0; i < c.selectors.size(); ++i) {
        const auto& s = c.selectors[i];
        auto path = fmt::format("spatial_selectors[{}]", i);
        if (s.id.empty())
            throw SchemaError(path + ".id", "empty selector id");
        if (!ids.insert(s.id).second)
            throw SchemaError(path + ".id", fmt::format("duplicate selector id '{}'", s.id));
        if ((s.query.extent().array() < 0.0).any())
            throw SchemaError(path + ".query", "negative extent");
        if (!s.query.intersects(c.domain))
            throw SchemaError(path + ".query", fmt::format("selector '{}' lies outside the design domain", s.id));
    }

    if (c.boundary_conditions.empty())
        throw SchemaError("boundary_conditions", "at least one boundary condition is required");
    if (c.loads.empty())
        throw SchemaError("loads", "at least one load is required");

    for (std::size_t i = 0; i < c.boundary_conditions.size(); ++i) {
        const auto& bc = c.boundary_conditions[i];
        auto path = fmt::format("boundary_conditions[{}]", i);
        if (!ids.count(bc.selector_id))
            throw SchemaError(path + ".spatial_selector_id",
                              fmt::format("unknown selector '{}'", bc.selector_id));
        if (!bc.dof_lock[0] && !bc.dof_lock[1] && !bc.dof_lock[2])
            throw SchemaError(path + ".dof_lock", "no degree of freedom locked");
    }
    for (std::size_t i = 0; i < c.loads.size(); ++i) {
        const auto& l = c.loads[i];
        auto path = fmt::format("loads[{}]", i);
        if (!ids.count(l.selector_id))
            throw SchemaError(path + ".spatial_selector_id", fmt::format("unknown selector '{}'", l.selector_id));
        if (!(l.magnitude_newtons > 0.0) || !std::isfinite(l.magnitude_newtons))
            throw SchemaError(path + ".magnitude_newtons", "magnitude must be positive");
        if (!l.direction.allFinite() || std::abs(l.direction.norm() - 1.0) > 1e-9)
            throw SchemaError(path + ".direction", "direction must be a unit vector");
    }
}

LoadCase load_case_from_json(const json& doc)
{
    if (!doc.is_object())
        throw SchemaError("", "load case must be a JSON object");

    LoadCase c;
    const json& meta = require(doc, "meta", "");
    c.problem_id = require_string(meta, "problem_id", "meta");
    if (auto it = meta.find("description"); it != meta.end() && it->is_string())
        c.description = it->get<std::string>();

    const json& dd = require(doc, "design_domain", "");
    c.units = require_string(dd, "units", "design_domain");
    c.domain = parse_box(require(dd, "bounds", "design_domain"), "design_domain.bounds");
    if (auto it = dd.find("keep_out"); it != dd.end()) {
        if (!it->is_array())
            throw SchemaError("design_domain.keep_out", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            c.keep_out.push_back(parse_box((*it)[i], fmt::format("design_domain.keep_out[{}]", i)));
    }

    const json& sels = require(doc, "spatial_selectors", "");
    if (!sels.is_array())
        throw SchemaError("spatial_selectors", "expected an array");
    for (std::size_t i = 0; i < sels.size(); ++i) {
        auto path = fmt::format("spatial_selectors[{}]", i);
        SpatialSelector s;
        s.id = require_string(sels[i], "id", path);
        s.query = parse_box(require(sels[i], "query", path), path + ".query");
        c.selectors.push_back(std::move(s));
    }

    const json& bcs = require(doc, "boundary_conditions", "");
    if (!bcs.is_array())
        throw SchemaError("boundary_conditions", "expected an array");
    for (std::size_t i = 0; i < bcs.size(); ++i) {
        auto path = fmt::format("boundary_conditions[{}]", i);
        BoundaryCondition bc;
        bc.selector_id = require_string(bcs[i], "spatial_selector_id", path);
        auto type = require_string(bcs[i], "type", path);
        if (type != "fixed_displacement")
            throw SchemaError(path + ".type", fmt::format("unknown boundary condition type '{}'", type));
        const json& lock = require(bcs[i], "dof_lock", path);
        static constexpr const char* keys[] = {"ux", "uy", "uz"};
        for (int a = 0; a < 3; ++a) {
            const json& v = require(lock, keys[a], path + ".dof_lock");
            if (!v.is_boolean())
                throw SchemaError(path + ".dof_lock." + keys[a], "expected a boolean");
            bc.dof_lock[a] = v.get<bool>();
        }
        c.boundary_conditions.push_back(std::move(bc));
    }

    const json& loads = require(doc, "loads", "");
    if (!loads.is_array())
        throw SchemaError("loads", "expected an array");
    for (std::size_t i = 0; i < loads.size(); ++i) {
        auto path = fmt::format("loads[{}]", i);
        Load l;
        l.selector_id = require_string(loads[i], "spatial_selector_id", path);
        l.kind = parse_load_kind(require_string(loads[i], "type", path), path + ".type");
        l.magnitude_newtons = require_number(loads[i], "magnitude_newtons", path);
        l.direction = parse_direction(require(loads[i], "direction", path), path + ".direction");
        c.loads.push_back(std::move(l));
    }

    validate_load_case(c);
    return c;
}

LoadCase parse_load_case(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError("", fmt::format("invalid JSON: {}", e.what()));
    }
    return load_case_from_json(doc);
}

json to_json(const LoadCase& c)
{
    json meta = {{"problem_id", c.problem_id}};
    if (!c.description.empty())
        meta["description"] = c.description;

    json dd = {{"units", c.units}, {"bounds", box_json(c.domain)}};
    if (!c.keep_out.empty()) {
        json ko = json::array();
        for (const auto& b : c.keep_out)
            ko.push_back(box_json(b));
        dd["keep_out"] = std::move(ko);
    }

    json sels = json::array();
    for (const auto& s : c.selectors)
        sels.push_back({{"id", s.id}, {"query", box_json(s.query)}});

    json bcs = json::array();
    for (const auto& bc : c.boundary_conditions)
        bcs.push_back({{"spatial_selector_id", bc.selector_id},
                       {"type", "fixed_displacement"},
                       {"dof_lock", {{"ux", bc.dof_lock[0]}, {"uy", bc.dof_lock[1]}, {"uz", bc.dof_lock[2]}}}});

    json loads = json::array();
    for (const auto& l : c.loads)
        loads.push_back({{"spatial_selector_id", l.selector_id},
                         {"type", to_string(l.kind)},
                         {"magnitude_newtons", l.magnitude_newtons},
                         {"direction", {l.direction.x(), l.direction.y(), l.direction.z()}}});

    return {{"meta", std::move(meta)},
            {"design_domain", std::move(dd)},
            {"spatial_selectors", std::move(sels)},
            {"boundary_conditions", std::move(bcs)},
            {"loads", std::move(loads)}};
}

std::string serialize_load_case(const LoadCase& c)
{
    return to_json(c).dump(2) + "\n";
}

LoadCase apply_variant(const LoadCase& c, const VariantSpec& v)
{
    LoadCase out = c;
    out.domain = c.domain.scaled(v.geom_scale);
    for (auto& k : out.keep_out)
        k = k.scaled(v.geom_scale);
    for (auto& s : out.selectors)
        s.query = s.query.scaled(v.geom_scale);
    for (auto& l : out.loads)
        l.magnitude_newtons *= v.force_scale;
    return out;
}

std::vector<std::pair<LoadCase, VariantSpec>> enumerate_variants(const std::vector<LoadCase>& cases,
                                                                 const std::vector<double>& geom_scales,
                                                                 const std::vector<double>& force_scales)
{
    std::vector<std::pair<LoadCase, VariantSpec>> out;
    out.reserve(cases.size() * geom_scales.size() * force_scales.size());
    for (const auto& c : cases)
        for (double g : geom_scales)
            for (double f : force_scales) {
                VariantSpec v{g, f};
                out.emplace_back(apply_variant(c, v), v);
            }
    return out;
}

std::vector<VariantSpec> default_variant_specs()
{
    std::vector<VariantSpec> out;
    for (double g : kDefaultGeomScales)
        for (double f : kDefaultForceScales)
            out.push_back({g, f});
    return out;
}

} // namespace physcad
