#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "vtto/field_grid.hpp"

namespace vtto {

struct MaterialModel {
    double E0 = 1.0;
    double nu = 0.3;
    double rho_min = 1e-9; ///< stiffness floor of void elements

    void validate() const;
};

enum class Axis { x = 0, y = 1 };

struct FixedDof {
    int node;
    Axis axis;
};

struct PointLoad {
    int node;
    Axis axis;
    double magnitude;
};

struct BoundaryConditions {
    std::vector<FixedDof> fixed;
    std::vector<PointLoad> loads;

    /// Throws StructuralError when rigid-body modes remain or the load vanishes.
    void validate(const StructuredGrid& grid) const;
};

enum class Edge { left, right, bottom, top };

/// Clamps every node on `clamp` and puts a point load on the node nearest to `at`.
BoundaryConditions clamped_point_load(const StructuredGrid& grid, Edge clamp, Point at, double fx,
                                      double fy);

/// Left edge clamped, downward load of the given magnitude at mid-height of the right edge.
BoundaryConditions cantilever(const StructuredGrid& grid, double magnitude = 1.0);

// Selectively penalized density: identity above rho_low, power law below it.
double simp_lt_penalize(double rho, double p, double rho_low);
double simp_lt_derivative(double rho, double p, double rho_low);

enum class PenaltyKind {
    selective, ///< low-thickness SIMP, only densities below rho_low are penalized
    global     ///< classic SIMP, rho^p everywhere
};

struct Penalization {
    PenaltyKind kind = PenaltyKind::selective;
    double p = 1.0;
    double rho_low = 0.1;

    void validate() const;
    double value(double rho) const;
    double derivative(double rho) const;
};

double interpolate_modulus(double rho_physical, const Penalization& pen, const MaterialModel& mat);
double interpolate_modulus(double rho_physical, double p, double rho_low, const MaterialModel& mat);

using ElementMatrix = Eigen::Matrix<double, 8, 8>;

/// Bilinear plane-stress stiffness of a square cell for E = 1 and unit thickness.
/// Dofs ordered (ux, uy) per node, nodes counter-clockwise from the lower left.
ElementMatrix unit_element_stiffness(double nu);

struct StateSolution {
    Eigen::VectorXd u; ///< all dofs, constrained ones zero
    double compliance = 0.0;
    double relative_residual = 0.0;
    std::uint64_t field_revision = 0;
};

enum class LinearSolverKind { direct, iterative };

/**
 * Owns the sparsity pattern and the symbolic factorization for one grid and
 * one set of supports; every solve only refills values and refactorizes.
 */
class ElasticitySolver {
public:
    ElasticitySolver(const StructuredGrid& grid, BoundaryConditions bc, MaterialModel mat,
                     LinearSolverKind kind = LinearSolverKind::direct);

    StateSolution solve(const ElementField& rho_physical, const Penalization& pen);

    /// dF_c / d rho_physical; requires `sol` to come from solve() on this very field revision.
    std::vector<double> compliance_sensitivity(const StateSolution& sol,
                                               const ElementField& rho_physical,
                                               const Penalization& pen) const;

    /// u_e^T k0 u_e per element.
    std::vector<double> element_energies(const Eigen::VectorXd& u) const;

    const StructuredGrid& grid() const { return grid_; }
    const MaterialModel& material() const { return mat_; }
    const BoundaryConditions& boundary_conditions() const { return bc_; }
    const Eigen::VectorXd& load_vector() const { return f_; }
    int dof_count() const { return 2 * grid_.node_count(); }

private:
    using SparseMatrix = Eigen::SparseMatrix<double>;

    std::array<int, 8> element_dofs(int e) const;

    StructuredGrid grid_;
    BoundaryConditions bc_;
    MaterialModel mat_;
    LinearSolverKind kind_;
    ElementMatrix ke_;
    Eigen::VectorXd f_;
    std::vector<int> free_index_; ///< full dof -> reduced dof, -1 when fixed
    std::vector<int> free_dofs_;
    SparseMatrix k_;
    std::vector<int> slots_; ///< 64 value slots per element into k_, -1 when constrained
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
    bool analyzed_ = false;
};

StateSolution assemble_and_solve(const StructuredGrid& grid, const BoundaryConditions& bc,
                                 const ElementField& rho_physical, const Penalization& pen,
                                 const MaterialModel& mat);

} // namespace vtto
