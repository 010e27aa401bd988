#include "physcad/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace physcad {

void Material::validate() const
{
    if (!(youngs_modulus > 0.0))
        throw std::invalid_argument("Young's modulus must be positive");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
        throw std::invalid_argument("Poisson ratio must be in [0, 0.5)");
    if (!(yield_strength > 0.0))
        throw std::invalid_argument("yield strength must be positive");
}

DegenerateElement::DegenerateElement(std::size_t e, double volume)
    : Error(fmt::format("element {} has volume {:.3e} mm^3", e, volume)), element(e)
{
}

SolveDiverged::SolveDiverged(long it, double res)
    : Error(fmt::format("CG did not reach the residual target after {} iterations (residual {:.3e})", it, res)),
      iterations(it), residual(res)
{
}

std::size_t FemModel::fixed_count() const
{
    return static_cast<std::size_t>(std::count(fixed_dofs.begin(), fixed_dofs.end(), true));
}

Vec3 FemModel::applied_force_sum() const
{
    Vec3 s = Vec3::Zero();
    for (Eigen::Index i = 0; i < nodal_forces.size(); ++i)
        s[i % 3] += nodal_forces[i];
    return s;
}

FemModel build_model(std::shared_ptr<const TetMesh> mesh, const LoadCase& c, const Material& m, double tolerance)
{
    m.validate();
    if (!mesh || mesh->tets.empty())
        throw EmptyGeometry();
    const std::size_t n = mesh->nodes.size();

    FemModel model;
    model.fixed_dofs.assign(3 * n, false);
    model.nodal_forces = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(n));

    for (const auto& bc : c.boundary_conditions) {
        auto nodes = select_nodes(*mesh, c.selector(bc.selector_id).query, tolerance);
        if (nodes.empty())
            throw FixAreaEmpty(bc.selector_id);
        for (auto node : nodes)
            for (int a = 0; a < 3; ++a)
                if (bc.dof_lock[a])
                    model.fixed_dofs[3 * node + a] = true;
    }

    std::vector<bool> on_surface;
    std::vector<std::array<std::uint32_t, 3>> faces;
    for (const auto& load : c.loads) {
        auto nodes = select_nodes(*mesh, c.selector(load.selector_id).query, tolerance);
        const Vec3 total = load.magnitude_newtons * load.direction;

        if (load.kind == LoadKind::PointForce) {
            if (nodes.empty())
                throw LoadAreaEmpty(load.selector_id);
            for (auto node : nodes)
                model.nodal_forces.segment<3>(3 * node) += total / static_cast<double>(nodes.size());
            continue;
        }

        if (on_surface.empty()) {
            faces = boundary_faces(*mesh);
            on_surface.assign(n, false);
            for (const auto& f : faces)
                for (auto v : f)
                    on_surface[v] = true;
        }
        std::vector<bool> selected(n, false);
        std::vector<std::uint32_t> surface_nodes;
        for (auto node : nodes)
            if (on_surface[node]) {
                selected[node] = true;
                surface_nodes.push_back(node);
            }
        if (surface_nodes.empty())
            throw LoadAreaEmpty(load.selector_id);

        std::vector<double> weight(n, 0.0);
        double weight_sum = 0.0;
        for (const auto& f : faces) {
            if (!selected[f[0]] || !selected[f[1]] || !selected[f[2]])
                continue;
            const double area = 0.5
                                * (mesh->nodes[f[1]] - mesh->nodes[f[0]])
                                      .cross(mesh->nodes[f[2]] - mesh->nodes[f[0]])
                                      .norm();
            for (auto v : f)
                weight[v] += area / 3.0;
            weight_sum += area;
        }
        if (weight_sum > 0.0) {
            for (auto node : surface_nodes)
                if (weight[node] > 0.0)
                    model.nodal_forces.segment<3>(3 * node) += total * (weight[node] / weight_sum);
        } else {
            for (auto node : surface_nodes)
                model.nodal_forces.segment<3>(3 * node) += total / static_cast<double>(surface_nodes.size());
        }
    }

    model.mesh = std::move(mesh);
    return model;
}

Eigen::Matrix<double, 6, 6> elasticity_matrix(const Material& m)
{
    const double E = m.youngs_modulus, nu = m.poisson_ratio;
    const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = E / (2.0 * (1.0 + nu));
    Eigen::Matrix<double, 6, 6> D = Eigen::Matrix<double, 6, 6>::Zero();
    D.topLeftCorner<3, 3>().setConstant(lambda);
    D.topLeftCorner<3, 3>().diagonal().array() += 2.0 * mu;
    D.bottomRightCorner<3, 3>().diagonal().setConstant(mu);
    return D;
}

std::pair<Eigen::Matrix<double, 6, 12>, double> strain_displacement(const std::array<Vec3, 4>& x)
{
    // Linear shape functions N_i = a_i + b_i x + c_i y + d_i z; gradients are
    // the last three columns of inv([1 x y z]).
    Eigen::Matrix4d C;
    for (int i = 0; i < 4; ++i)
        C.row(i) << 1.0, x[i].x(), x[i].y(), x[i].z();
    const double volume = C.determinant() / 6.0;
    Eigen::Matrix4d inv = C.inverse();

    Eigen::Matrix<double, 6, 12> B = Eigen::Matrix<double, 6, 12>::Zero();
    for (int i = 0; i < 4; ++i) {
        const double dx = inv(1, i), dy = inv(2, i), dz = inv(3, i);
        const int c = 3 * i;
        B(0, c) = dx;
        B(1, c + 1) = dy;
        B(2, c + 2) = dz;
        B(3, c) = dy;
        B(3, c + 1) = dx;
        B(4, c + 1) = dz;
        B(4, c + 2) = dy;
        B(5, c) = dz;
        B(5, c + 2) = dx;
    }
    return {B, volume};
}

namespace {

std::array<Vec3, 4> tet_coords(const TetMesh& mesh, std::size_t e)
{
    const auto& t = mesh.tets[e];
    return {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]};
}

Matrix12 stiffness_from(const Eigen::Matrix<double, 6, 12>& B, double volume,
                        const Eigen::Matrix<double, 6, 6>& D)
{
    return volume * B.transpose() * D * B;
}

constexpr double kMinElementVolume = 1e-12;

} // namespace

Matrix12 element_stiffness(const std::array<Vec3, 4>& x, const Material& m)
{
    auto [B, volume] = strain_displacement(x);
    if (volume < kMinElementVolume)
        throw DegenerateElement(0, volume);
    return stiffness_from(B, volume, elasticity_matrix(m));
}

SparseMatrix assemble_stiffness(const TetMesh& mesh, const Material& m)
{
    const auto D = elasticity_matrix(m);
    const auto ndof = static_cast<Eigen::Index>(3 * mesh.nodes.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(144 * mesh.tets.size());
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        auto [B, volume] = strain_displacement(tet_coords(mesh, e));
        if (volume < kMinElementVolume)
            throw DegenerateElement(e, volume);
        Matrix12 Ke = stiffness_from(B, volume, D);
        const auto& t = mesh.tets[e];
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                trip.emplace_back(3 * t[i / 3] + i % 3, 3 * t[j / 3] + j % 3, Ke(i, j));
    }
    SparseMatrix K(ndof, ndof);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

double von_mises(const Stress6& s)
{
    const double sx = s[0], sy = s[1], sz = s[2], txy = s[3], tyz = s[4], tzx = s[5];
    const double v = sx * sx + sy * sy + sz * sz - sx * sy - sy * sz - sz * sx
                     + 3.0 * (txy * txy + tyz * tyz + tzx * tzx);
    return std::sqrt(std::max(0.0, v));
}

FemResult solve(const FemModel& model, const Material& m, const SolverOptions& opts)
{
    m.validate();
    const TetMesh& mesh = *model.mesh;
    const std::size_t ndof = 3 * mesh.nodes.size();
    const auto D = elasticity_matrix(m);

    std::vector<Eigen::Index> free_index(ndof, -1);
    Eigen::Index nfree = 0;
    for (std::size_t d = 0; d < ndof; ++d)
        if (!model.fixed_dofs[d])
            free_index[d] = nfree++;

    struct ElementData {
        Eigen::Matrix<double, 6, 12> B;
        double volume;
    };
    std::vector<ElementData> elements(mesh.tets.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(144 * mesh.tets.size());
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        auto [B, volume] = strain_displacement(tet_coords(mesh, e));
        if (volume < kMinElementVolume)
            throw DegenerateElement(e, volume);
        elements[e] = {B, volume};
        Matrix12 Ke = stiffness_from(B, volume, D);
        const auto& t = mesh.tets[e];
        for (int i = 0; i < 12; ++i) {
            Eigen::Index gi = free_index[3 * t[i / 3] + i % 3];
            if (gi < 0)
                continue;
            for (int j = 0; j < 12; ++j) {
                Eigen::Index gj = free_index[3 * t[j / 3] + j % 3];
                if (gj >= 0)
                    trip.emplace_back(gi, gj, Ke(i, j));
            }
        }
    }

    Eigen::VectorXd f(nfree);
    for (std::size_t d = 0; d < ndof; ++d)
        if (free_index[d] >= 0)
            f[free_index[d]] = model.nodal_forces[static_cast<Eigen::Index>(d)];

    FemResult r;
    Eigen::VectorXd u_free = Eigen::VectorXd::Zero(nfree);
    if (nfree > 0 && f.norm() > 0.0) {
        SparseMatrix K(nfree, nfree);
        K.setFromTriplets(trip.begin(), trip.end());
        trip.clear();
        trip.shrink_to_fit();

        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(opts.relative_tolerance);
        cg.setMaxIterations(opts.max_iterations > 0 ? opts.max_iterations : 20 * nfree);
        cg.compute(K);
        u_free = cg.solve(f);
        r.solver_iterations = static_cast<long>(cg.iterations());
        r.residual = cg.error();
        if (cg.info() != Eigen::Success || !u_free.allFinite() || r.residual > opts.relative_tolerance)
            throw SolveDiverged(r.solver_iterations, r.residual);
    }

    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
    for (std::size_t d = 0; d < ndof; ++d)
        if (free_index[d] >= 0)
            u[static_cast<Eigen::Index>(d)] = u_free[free_index[d]];

    r.displacements.resize(mesh.nodes.size());
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
        r.displacements[n] = u.segment<3>(3 * static_cast<Eigen::Index>(n));

    Eigen::VectorXd internal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
    r.element_stress.resize(mesh.tets.size());
    r.element_von_mises.resize(mesh.tets.size());
    for (std::size_t e = 0; e < mesh.tets.size(); ++e) {
        const auto& t = mesh.tets[e];
        Eigen::Matrix<double, 12, 1> ue;
        for (int q = 0; q < 4; ++q)
            ue.segment<3>(3 * q) = u.segment<3>(3 * static_cast<Eigen::Index>(t[q]));
        const auto& el = elements[e];
        Stress6 sigma = D * (el.B * ue);
        r.element_stress[e] = sigma;
        r.element_von_mises[e] = von_mises(sigma);
        Eigen::Matrix<double, 12, 1> fe = el.volume * el.B.transpose() * sigma;
        for (int q = 0; q < 4; ++q)
            internal.segment<3>(3 * static_cast<Eigen::Index>(t[q])) += fe.segment<3>(3 * q);
    }

    for (std::size_t e = 0; e < r.element_von_mises.size(); ++e)
        if (r.element_von_mises[e] > r.max_von_mises) {
            r.max_von_mises = r.element_von_mises[e];
            r.max_element = e;
        }
    r.safety_factor = r.max_von_mises > 1e-9 ? m.yield_strength / r.max_von_mises : kSafetyFactorCap;
    r.safety_factor = std::min(r.safety_factor, kSafetyFactorCap);

    r.applied_sum = model.applied_force_sum();
    for (std::size_t d = 0; d < ndof; ++d)
        if (model.fixed_dofs[d])
            r.reaction_sum[static_cast<int>(d % 3)] += internal[static_cast<Eigen::Index>(d)]
                                                       - model.nodal_forces[static_cast<Eigen::Index>(d)];
    return r;
}

std::vector<Hotspot> stress_hotspots(const FemResult& r, const TetMesh& mesh, std::size_t k)
{
    std::vector<std::size_t> order(r.element_von_mises.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (r.element_von_mises[a] != r.element_von_mises[b])
                              return r.element_von_mises[a] > r.element_von_mises[b];
                          return a < b;
                      });
    std::vector<Hotspot> out;
    for (std::size_t i = 0; i < k; ++i)
        out.push_back({order[i], mesh.centroid(order[i]), r.element_von_mises[order[i]]});
    return out;
}

} // namespace physcad
