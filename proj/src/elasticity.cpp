#include "vtto/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include "vtto/errors.hpp"

namespace vtto {

void MaterialModel::validate() const
{
    if (!(E0 > 0.0)) throw ConfigError("E0 must be positive");
    if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("Poisson's ratio must lie in [0, 0.5)");
    if (!(rho_min > 0.0 && rho_min < 1e-2)) throw ConfigError("rho_min must lie in (0, 0.01)");
}

void BoundaryConditions::validate(const StructuredGrid& grid) const
{
    // Rigid motions u = (a - t*y, b + t*x); the supports must pin all three parameters.
    Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
    for (const auto& d : fixed) {
        if (d.node < 0 || d.node >= grid.node_count())
            throw StructuralError("fixed dof references node " + std::to_string(d.node)
                                  + " outside the grid");
        const Point p = grid.node_position(d.node);
        const double s = std::max(grid.width(), grid.height());
        Eigen::Vector3d row = d.axis == Axis::x ? Eigen::Vector3d(1.0, 0.0, -p.y / s)
                                                : Eigen::Vector3d(0.0, 1.0, p.x / s);
        gram += row * row.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(gram);
    if (fixed.size() < 3 || eig.eigenvalues().minCoeff() < 1e-12)
        throw StructuralError("supports leave rigid-body modes unconstrained");

    double norm = 0.0;
    for (const auto& l : loads) {
        if (l.node < 0 || l.node >= grid.node_count())
            throw StructuralError("load references node " + std::to_string(l.node)
                                  + " outside the grid");
        norm += std::abs(l.magnitude);
    }
    if (!(norm > 0.0)) throw StructuralError("load vector is zero");
}

BoundaryConditions clamped_point_load(const StructuredGrid& grid, Edge clamp, Point at, double fx,
                                      double fy)
{
    BoundaryConditions bc;
    auto fix_node = [&](int i, int j) {
        const int n = grid.node_index(i, j);
        bc.fixed.push_back({n, Axis::x});
        bc.fixed.push_back({n, Axis::y});
    };
    switch (clamp) {
    case Edge::left: for (int j = 0; j <= grid.ny(); ++j) fix_node(0, j); break;
    case Edge::right: for (int j = 0; j <= grid.ny(); ++j) fix_node(grid.nx(), j); break;
    case Edge::bottom: for (int i = 0; i <= grid.nx(); ++i) fix_node(i, 0); break;
    case Edge::top: for (int i = 0; i <= grid.nx(); ++i) fix_node(i, grid.ny()); break;
    }
    if (!grid.contains(at)) throw GeometryError("load point lies outside the domain");
    const int i = static_cast<int>(std::lround((at.x - grid.origin().x) / grid.h()));
    const int j = static_cast<int>(std::lround((at.y - grid.origin().y) / grid.h()));
    const int n = grid.node_index(std::clamp(i, 0, grid.nx()), std::clamp(j, 0, grid.ny()));
    if (fx != 0.0) bc.loads.push_back({n, Axis::x, fx});
    if (fy != 0.0) bc.loads.push_back({n, Axis::y, fy});
    return bc;
}

BoundaryConditions cantilever(const StructuredGrid& grid, double magnitude)
{
    const Point tip{grid.origin().x + grid.width(), grid.origin().y + 0.5 * grid.height()};
    return clamped_point_load(grid, Edge::left, tip, 0.0, -magnitude);
}

namespace {

void check_penalty(double p, double rho_low)
{
    if (!(p >= 1.0)) throw ParameterError("penalty exponent must be >= 1");
    if (!(rho_low > 0.0 && rho_low < 1.0)) throw ParameterError("rho_low must lie in (0, 1)");
}

} // namespace

double simp_lt_penalize(double rho, double p, double rho_low)
{
    check_penalty(p, rho_low);
    if (rho >= rho_low) return rho;
    return std::pow(rho / rho_low, p) * rho_low;
}

double simp_lt_derivative(double rho, double p, double rho_low)
{
    check_penalty(p, rho_low);
    if (rho >= rho_low) return 1.0;
    return p * std::pow(rho / rho_low, p - 1.0);
}

void Penalization::validate() const { check_penalty(p, rho_low); }

double Penalization::value(double rho) const
{
    if (kind == PenaltyKind::global) return std::pow(rho, p);
    return simp_lt_penalize(rho, p, rho_low);
}

double Penalization::derivative(double rho) const
{
    if (kind == PenaltyKind::global) return p == 1.0 ? 1.0 : p * std::pow(rho, p - 1.0);
    return simp_lt_derivative(rho, p, rho_low);
}

double interpolate_modulus(double rho_physical, const Penalization& pen, const MaterialModel& mat)
{
    return (pen.value(rho_physical) * (1.0 - mat.rho_min) + mat.rho_min) * mat.E0;
}

double interpolate_modulus(double rho_physical, double p, double rho_low, const MaterialModel& mat)
{
    return interpolate_modulus(rho_physical, Penalization{PenaltyKind::selective, p, rho_low}, mat);
}

ElementMatrix unit_element_stiffness(double nu)
{
    Eigen::Matrix3d d;
    d << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
    d /= (1.0 - nu * nu);

    // Reference square [-1, 1]^2 mapped to a cell of size h: the Jacobian
    // determinant h^2/4 cancels against the (2/h)^2 of the derivatives.
    const double gp = 1.0 / std::sqrt(3.0);
    const std::array<double, 4> xi_n{-1.0, 1.0, 1.0, -1.0};
    const std::array<double, 4> eta_n{-1.0, -1.0, 1.0, 1.0};
    ElementMatrix ke = ElementMatrix::Zero();
    for (double xi : {-gp, gp}) {
        for (double eta : {-gp, gp}) {
            Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
            for (int a = 0; a < 4; ++a) {
                const double dx = 0.25 * xi_n[a] * (1.0 + eta_n[a] * eta);
                const double dy = 0.25 * eta_n[a] * (1.0 + xi_n[a] * xi);
                b(0, 2 * a) = dx;
                b(1, 2 * a + 1) = dy;
                b(2, 2 * a) = dy;
                b(2, 2 * a + 1) = dx;
            }
            ke += b.transpose() * d * b;
        }
    }
    return ke;
}

ElasticitySolver::ElasticitySolver(const StructuredGrid& grid, BoundaryConditions bc,
                                   MaterialModel mat, LinearSolverKind kind)
    : grid_(grid), bc_(std::move(bc)), mat_(mat), kind_(kind), ke_(unit_element_stiffness(mat.nu))
{
    mat_.validate();
    bc_.validate(grid_);

    const int ndof = dof_count();
    free_index_.assign(ndof, 0);
    for (const auto& d : bc_.fixed) free_index_[2 * d.node + static_cast<int>(d.axis)] = -1;
    for (int k = 0; k < ndof; ++k) {
        if (free_index_[k] < 0) continue;
        free_index_[k] = static_cast<int>(free_dofs_.size());
        free_dofs_.push_back(k);
    }

    f_ = Eigen::VectorXd::Zero(ndof);
    for (const auto& l : bc_.loads) f_[2 * l.node + static_cast<int>(l.axis)] += l.magnitude;

    const int nel = grid_.element_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nel) * 64);
    for (int e = 0; e < nel; ++e) {
        const auto dofs = element_dofs(e);
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
                const int r = free_index_[dofs[a]];
                const int c = free_index_[dofs[b]];
                if (r >= 0 && c >= 0) trip.emplace_back(r, c, 1.0);
            }
    }
    const int nfree = static_cast<int>(free_dofs_.size());
    k_.resize(nfree, nfree);
    k_.setFromTriplets(trip.begin(), trip.end());
    k_.makeCompressed();

    slots_.assign(static_cast<std::size_t>(nel) * 64, -1);
    const int* outer = k_.outerIndexPtr();
    const int* inner = k_.innerIndexPtr();
    for (int e = 0; e < nel; ++e) {
        const auto dofs = element_dofs(e);
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
                const int r = free_index_[dofs[a]];
                const int c = free_index_[dofs[b]];
                if (r < 0 || c < 0) continue;
                const int* pos = std::lower_bound(inner + outer[c], inner + outer[c + 1], r);
                slots_[static_cast<std::size_t>(e) * 64 + a * 8 + b]
                    = static_cast<int>(pos - inner);
            }
    }
}

std::array<int, 8> ElasticitySolver::element_dofs(int e) const
{
    const auto nodes = grid_.element_nodes(e);
    std::array<int, 8> dofs{};
    for (int a = 0; a < 4; ++a) {
        dofs[2 * a] = 2 * nodes[a];
        dofs[2 * a + 1] = 2 * nodes[a] + 1;
    }
    return dofs;
}

StateSolution ElasticitySolver::solve(const ElementField& rho_physical, const Penalization& pen)
{
    const int nel = grid_.element_count();
    if (rho_physical.size() != static_cast<std::size_t>(nel))
        throw ParameterError("density field length does not match the grid");
    pen.validate();

    double* val = k_.valuePtr();
    std::fill(val, val + k_.nonZeros(), 0.0);
    for (int e = 0; e < nel; ++e) {
        const double modulus = interpolate_modulus(rho_physical[e], pen, mat_);
        const int* slot = slots_.data() + static_cast<std::size_t>(e) * 64;
        for (int k = 0; k < 64; ++k)
            if (slot[k] >= 0) val[slot[k]] += modulus * ke_(k / 8, k % 8);
    }

    const int nfree = static_cast<int>(free_dofs_.size());
    Eigen::VectorXd rhs(nfree);
    for (int k = 0; k < nfree; ++k) rhs[k] = f_[free_dofs_[k]];

    Eigen::VectorXd x;
    if (kind_ == LinearSolverKind::direct) {
        if (!analyzed_) {
            llt_.analyzePattern(k_);
            analyzed_ = true;
        }
        llt_.factorize(k_);
        if (llt_.info() != Eigen::Success)
            throw StructuralError("stiffness matrix is not positive definite");
        x = llt_.solve(rhs);
        // Iterative refinement keeps the residual within tolerance for very soft voids.
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd r = rhs - k_.selfadjointView<Eigen::Lower>() * x;
            if (r.norm() <= 1e-15 * rhs.norm()) break;
            x += llt_.solve(r);
        }
    } else {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(1e-9);
        cg.setMaxIterations(20 * nfree);
        cg.compute(k_);
        x = cg.solve(rhs);
        if (cg.info() != Eigen::Success)
            throw NumericalError("conjugate gradient did not converge after "
                                 + std::to_string(cg.iterations()) + " iterations");
    }

    StateSolution sol;
    sol.relative_residual = (rhs - k_ * x).norm() / rhs.norm();
    const double tol = kind_ == LinearSolverKind::direct ? 1e-10 : 1e-8;
    if (!(sol.relative_residual <= tol))
        throw NumericalError("state solve residual " + std::to_string(sol.relative_residual)
                             + " above tolerance");
    sol.u = Eigen::VectorXd::Zero(dof_count());
    for (int k = 0; k < nfree; ++k) sol.u[free_dofs_[k]] = x[k];
    sol.compliance = f_.dot(sol.u);
    sol.field_revision = rho_physical.revision();
    return sol;
}

std::vector<double> ElasticitySolver::element_energies(const Eigen::VectorXd& u) const
{
    const int nel = grid_.element_count();
    std::vector<double> out(nel);
    Eigen::Matrix<double, 8, 1> ue;
    for (int e = 0; e < nel; ++e) {
        const auto dofs = element_dofs(e);
        for (int a = 0; a < 8; ++a) ue[a] = u[dofs[a]];
        out[e] = ue.dot(ke_ * ue);
    }
    return out;
}

std::vector<double> ElasticitySolver::compliance_sensitivity(const StateSolution& sol,
                                                             const ElementField& rho_physical,
                                                             const Penalization& pen) const
{
    if (sol.field_revision != rho_physical.revision())
        throw ContractViolation("displacements were computed for a different density revision");
    std::vector<double> out = element_energies(sol.u);
    const double scale = mat_.E0 * (1.0 - mat_.rho_min);
    for (std::size_t e = 0; e < out.size(); ++e)
        out[e] = -out[e] * scale * pen.derivative(rho_physical[e]);
    return out;
}

StateSolution assemble_and_solve(const StructuredGrid& grid, const BoundaryConditions& bc,
                                 const ElementField& rho_physical, const Penalization& pen,
                                 const MaterialModel& mat)
{
    ElasticitySolver solver(grid, bc, mat);
    return solver.solve(rho_physical, pen);
}

} // namespace vtto
