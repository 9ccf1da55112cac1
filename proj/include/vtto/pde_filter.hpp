#pragma once

#include <span>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "vtto/field_grid.hpp"

namespace vtto {

/// Helmholtz length scale equivalent to a classical density-filter radius.
double helmholtz_length_scale(double radius);

/**
 * Helmholtz-type density filter (-R^2 lap + 1) rho_f = rho with zero-flux
 * boundaries, discretized cell-centered on the element grid.
 *
 * The operator is a symmetric M-matrix with unit row sums, so the filter
 * preserves constants and total volume, obeys a discrete maximum principle and
 * is its own transpose. It is factorized once at construction.
 */
class PdeFilter {
public:
    /// `radius` is a classical filter radius unless `radius_is_length_scale` is set,
    /// in which case it is used as R directly.
    PdeFilter(const StructuredGrid& grid, double radius, bool radius_is_length_scale = false);

    double radius() const { return radius_; }
    double length_scale() const { return length_scale_; }
    int element_count() const { return n_; }

    std::vector<double> apply(std::span<const double> rho) const;
    ElementField apply(const ElementField& rho) const;

    /// Transpose action used by the chain rule.
    std::vector<double> apply_transpose(std::span<const double> grad) const;

private:
    using SparseMatrix = Eigen::SparseMatrix<double>;

    std::vector<double> solve(std::span<const double> rhs) const;

    int n_;
    double radius_;
    double length_scale_;
    SparseMatrix op_;
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
};

PdeFilter build_filter(const StructuredGrid& grid, double r);

} // namespace vtto
