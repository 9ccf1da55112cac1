#include "vtto/pde_filter.hpp"

#include <algorithm>
#include <cmath>

#include "vtto/errors.hpp"

namespace vtto {

double helmholtz_length_scale(double radius) { return radius / (2.0 * std::sqrt(3.0)); }

PdeFilter::PdeFilter(const StructuredGrid& grid, double radius, bool radius_is_length_scale)
    : n_(grid.element_count()), radius_(radius)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ParameterError("filter radius must be positive");
    length_scale_ = radius_is_length_scale ? radius : helmholtz_length_scale(radius);

    // Two-point flux between face neighbors; missing faces carry zero flux.
    const double c = (length_scale_ * length_scale_) / (grid.h() * grid.h());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_) * 5);
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const int e = grid.element_index(i, j);
            double diag = 1.0;
            auto link = [&](int ii, int jj) {
                if (ii < 0 || jj < 0 || ii >= grid.nx() || jj >= grid.ny()) return;
                trip.emplace_back(e, grid.element_index(ii, jj), -c);
                diag += c;
            };
            link(i - 1, j);
            link(i + 1, j);
            link(i, j - 1);
            link(i, j + 1);
            trip.emplace_back(e, e, diag);
        }
    }
    op_.resize(n_, n_);
    op_.setFromTriplets(trip.begin(), trip.end());
    op_.makeCompressed();
    llt_.compute(op_);
    if (llt_.info() != Eigen::Success) throw NumericalError("filter factorization failed");
}

std::vector<double> PdeFilter::solve(std::span<const double> rhs) const
{
    if (rhs.size() != static_cast<std::size_t>(n_))
        throw ParameterError("field length does not match the filter grid");
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n_);
    Eigen::VectorXd x = llt_.solve(b);
    return {x.data(), x.data() + n_};
}

std::vector<double> PdeFilter::apply(std::span<const double> rho) const
{
    std::vector<double> out = solve(rho);
    // Round-off can push values a hair outside [0, 1]; larger excursions come from
    // out-of-range input and are left alone.
    for (double& v : out) {
        if (v < 0.0 && v > -1e-10) v = 0.0;
        if (v > 1.0 && v < 1.0 + 1e-10) v = 1.0;
    }
    return out;
}

ElementField PdeFilter::apply(const ElementField& rho) const
{
    return ElementField(apply(rho.values()), Stage::filtered);
}

std::vector<double> PdeFilter::apply_transpose(std::span<const double> grad) const
{
    return solve(grad);
}

PdeFilter build_filter(const StructuredGrid& grid, double r) { return PdeFilter(grid, r); }

} // namespace vtto
