#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vtto/field_grid.hpp"
#include "vtto/pde_filter.hpp"

namespace vtto {

// ---------------------------------------------------------------------------
// Pointwise maps
// ---------------------------------------------------------------------------

/// Sigmoid with a beta-shifted threshold: 1/2 [1 + tanh(beta (rho/eta - eta^(1/beta)))].
double switching(double rho, double beta, double eta);
double switching_derivative(double rho, double beta, double eta);

/// Low-thickness projection [1 - S] rho^beta + S rho with S = switching(rho, beta, rho_low).
double lt_project(double rho_tilde, double beta_bar, double rho_low);
double lt_project_derivative(double rho_tilde, double beta_bar, double rho_low);

/// Smoothed Heaviside passing through (0, 0) and (1, 1); identity as beta -> 0.
double smoothed_heaviside(double rho, double beta, double eta);
double smoothed_heaviside_derivative(double rho, double beta, double eta);

// ---------------------------------------------------------------------------
// Density-gradient-informed projection
// ---------------------------------------------------------------------------

/// Below this local variation the DGI projection is the identity.
inline constexpr double kDegenerateVariation = 1e-9;

struct LocalStats {
    double min = 0.0;
    double max = 0.0;

    double variation() const { return max - min; }
    double mid() const { return min + 0.5 * variation(); }
};

using NeighborhoodStats = std::vector<LocalStats>;

NeighborhoodStats neighborhood_stats(const NeighborhoodCache& neighbors,
                                     std::span<const double> rho_tilde);
NeighborhoodStats neighborhood_stats(const StructuredGrid& grid, std::span<const double> rho_tilde,
                                     double r);

/// Scaled and shifted Heaviside on [min, max] with sharpness beta_hat * d_r and threshold 1/2.
double dgi_project(double rho_tilde, const LocalStats& stats, double beta_hat);
/// Derivative with the neighborhood statistics held fixed.
double dgi_derivative(double rho_tilde, const LocalStats& stats, double beta_hat);

// ---------------------------------------------------------------------------
// Regularization chain: filter -> DGI -> low-thickness projection
// ---------------------------------------------------------------------------

struct ProjectionParams {
    double rho_low = 0.1;
    double beta_bar = 1.0;
    double beta_hat = 0.1;
    bool lt_enabled = true;
    bool dgi_enabled = true;

    static constexpr double eta_hat = 0.5;

    void validate() const;
};

struct ChainState {
    ElementField filtered;
    ElementField dgi;
    ElementField physical;
    NeighborhoodStats stats; ///< on the filtered field, empty when DGI is off
    std::vector<double> d_dgi; ///< d rho_hat / d rho_tilde
    std::vector<double> d_lt;  ///< d rho_bar / d rho_hat
    std::uint64_t raw_revision = 0;
};

class RegularizationChain {
public:
    /// The DGI neighborhoods use the filter radius (floored at 1.5h).
    RegularizationChain(const StructuredGrid& grid, double filter_radius,
                        bool radius_is_length_scale = false);

    /// When `frozen` is given, those statistics replace the ones computed on the filtered field.
    ChainState forward(const ElementField& raw, const ProjectionParams& params,
                       const NeighborhoodStats* frozen = nullptr) const;

    /// Physical densities only, without derivative factors (used inside the multiplier search).
    std::vector<double> physical_values(std::span<const double> raw,
                                        const ProjectionParams& params) const;

    /// Pulls dF/d rho_physical back to dF/d rho_raw through the cached derivative factors.
    std::vector<double> gradient(const ChainState& state, std::span<const double> d_physical) const;
    /// Same, checking that `state` was produced from `raw`.
    std::vector<double> gradient(const ElementField& raw, const ChainState& state,
                                 std::span<const double> d_physical) const;

    const PdeFilter& filter() const { return filter_; }
    const NeighborhoodCache& neighbors() const { return neighbors_; }

private:
    PdeFilter filter_;
    NeighborhoodCache neighbors_;
};

ChainState regularize_chain(const RegularizationChain& chain, const ElementField& raw,
                            const ProjectionParams& params);
std::vector<double> chain_gradient(const RegularizationChain& chain, const ElementField& raw,
                                   const ChainState& state, std::span<const double> d_physical);

} // namespace vtto
