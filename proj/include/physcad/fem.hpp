#pragma once

#include "physcad/common.hpp"
#include "physcad/loadcase.hpp"
#include "physcad/meshing.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <utility>
#include <vector>

namespace physcad {

/// Isotropic linear-elastic material in MPa. Defaults are generic aluminium.
struct Material {
    double youngs_modulus = 70000.0;
    double poisson_ratio = 0.33;
    double yield_strength = 250.0;

    void validate() const;
};

using Stress6 = Eigen::Matrix<double, 6, 1>; ///< xx, yy, zz, xy, yz, zx
using Matrix12 = Eigen::Matrix<double, 12, 12>;
using SparseMatrix = Eigen::SparseMatrix<double>;

class FixAreaEmpty : public Error {
public:
    explicit FixAreaEmpty(const std::string& selector)
        : Error("boundary condition on '" + selector + "' selects no nodes"), selector_id(selector)
    {
    }
    std::string selector_id;
};

class LoadAreaEmpty : public Error {
public:
    explicit LoadAreaEmpty(const std::string& selector)
        : Error("load on '" + selector + "' selects no surface nodes"), selector_id(selector)
    {
    }
    std::string selector_id;
};

class DegenerateElement : public Error {
public:
    DegenerateElement(std::size_t element, double volume);
    std::size_t element;
};

class SolveDiverged : public Error {
public:
    SolveDiverged(long iterations, double residual);
    long iterations;
    double residual;
};

struct FemModel {
    std::shared_ptr<const TetMesh> mesh;
    std::vector<bool> fixed_dofs;    ///< 3 per node, node-major
    Eigen::VectorXd nodal_forces;    ///< N, 3 per node, node-major

    std::size_t fixed_count() const;
    Vec3 applied_force_sum() const;
};

struct SolverOptions {
    double relative_tolerance = 1e-8;
    long max_iterations = 0; ///< 0 means 20 x free dof count
};

struct FemResult {
    std::vector<Vec3> displacements; ///< mm
    std::vector<Stress6> element_stress;
    std::vector<double> element_von_mises; ///< MPa
    double max_von_mises = 0.0;
    std::size_t max_element = 0;
    double safety_factor = 0.0;
    long solver_iterations = 0;
    double residual = 0.0;
    Vec3 reaction_sum = Vec3::Zero(); ///< sum of support reactions
    Vec3 applied_sum = Vec3::Zero();
};

inline constexpr double kSafetyFactorCap = 1e6;

/// Applies boundary conditions and loads to the nodes picked by each selector.
/// Point forces split equally over the selected nodes. Distributed forces act
/// on the selected boundary surface: the total is spread over boundary
/// triangles whose nodes are all selected, weighted by area (consistent nodal
/// loads for a uniform traction), or equally over the selected surface nodes
/// when no full triangle is selected.
FemModel build_model(std::shared_ptr<const TetMesh> mesh, const LoadCase& c, const Material& m, double tolerance);

Eigen::Matrix<double, 6, 6> elasticity_matrix(const Material& m);

/// Constant-strain tet4 B matrix (6x12) and signed volume.
std::pair<Eigen::Matrix<double, 6, 12>, double> strain_displacement(const std::array<Vec3, 4>& x);

/// Ke = V * B^T * D * B. Throws DegenerateElement below 1e-12 mm^3.
Matrix12 element_stiffness(const std::array<Vec3, 4>& x, const Material& m);

/// Global stiffness over all 3n dofs (no constraints applied).
SparseMatrix assemble_stiffness(const TetMesh& mesh, const Material& m);

/// Diagonal-preconditioned CG on the free dofs, then per-element stresses.
/// Throws SolveDiverged if the relative residual target is not met.
FemResult solve(const FemModel& model, const Material& m, const SolverOptions& opts = {});

double von_mises(const Stress6& s);

struct Hotspot {
    std::size_t element = 0;
    Vec3 centroid;
    double von_mises = 0.0;
};

/// Top-k elements by von Mises stress, descending; ties go to the lower index.
std::vector<Hotspot> stress_hotspots(const FemResult& r, const TetMesh& mesh, std::size_t k);

} // namespace physcad
