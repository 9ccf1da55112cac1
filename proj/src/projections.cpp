#include "vtto/projections.hpp"

#include <algorithm>
#include <cmath>

#include "vtto/errors.hpp"

namespace vtto {

namespace {

double sech2(double x)
{
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

void check_threshold(double eta)
{
    if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("threshold must lie in (0, 1)");
}

void check_lt_sharpness(double beta)
{
    if (!(beta >= 1.0)) throw ParameterError("low-thickness sharpness must be >= 1");
}

} // namespace

double switching(double rho, double beta, double eta)
{
    check_threshold(eta);
    if (!(beta > 0.0)) throw ParameterError("switching sharpness must be positive");
    return 0.5 * (1.0 + std::tanh(beta * (rho / eta - std::pow(eta, 1.0 / beta))));
}

double switching_derivative(double rho, double beta, double eta)
{
    check_threshold(eta);
    if (!(beta > 0.0)) throw ParameterError("switching sharpness must be positive");
    return 0.5 * beta / eta * sech2(beta * (rho / eta - std::pow(eta, 1.0 / beta)));
}

double lt_project(double rho_tilde, double beta_bar, double rho_low)
{
    check_lt_sharpness(beta_bar);
    check_threshold(rho_low);
    if (beta_bar == 1.0) return rho_tilde;
    const double s = switching(rho_tilde, beta_bar, rho_low);
    return (1.0 - s) * std::pow(rho_tilde, beta_bar) + s * rho_tilde;
}

double lt_project_derivative(double rho_tilde, double beta_bar, double rho_low)
{
    check_lt_sharpness(beta_bar);
    check_threshold(rho_low);
    if (beta_bar == 1.0) return 1.0;
    const double s = switching(rho_tilde, beta_bar, rho_low);
    const double ds = switching_derivative(rho_tilde, beta_bar, rho_low);
    const double pw = std::pow(rho_tilde, beta_bar);
    const double dpw = beta_bar * std::pow(rho_tilde, beta_bar - 1.0);
    return ds * (rho_tilde - pw) + (1.0 - s) * dpw + s;
}

double smoothed_heaviside(double rho, double beta, double eta)
{
    check_threshold(eta);
    if (!(beta >= 0.0)) throw ParameterError("Heaviside sharpness must be non-negative");
    if (beta < 1e-6) {
        // Third-order expansion of both tanh sums; exact at rho = 0 and rho = 1.
        const double a = eta * eta * eta + std::pow(rho - eta, 3);
        const double b = eta * eta * eta + std::pow(1.0 - eta, 3);
        return rho - beta * beta / 3.0 * (a - rho * b);
    }
    const double t = std::tanh(beta * eta);
    return (t + std::tanh(beta * (rho - eta))) / (t + std::tanh(beta * (1.0 - eta)));
}

double smoothed_heaviside_derivative(double rho, double beta, double eta)
{
    check_threshold(eta);
    if (!(beta >= 0.0)) throw ParameterError("Heaviside sharpness must be non-negative");
    if (beta < 1e-6) {
        const double b = eta * eta * eta + std::pow(1.0 - eta, 3);
        return 1.0 - beta * beta / 3.0 * (3.0 * (rho - eta) * (rho - eta) - b);
    }
    const double den = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
    return beta * sech2(beta * (rho - eta)) / den;
}

NeighborhoodStats neighborhood_stats(const NeighborhoodCache& neighbors,
                                     std::span<const double> rho_tilde)
{
    const int n = neighbors.element_count();
    if (rho_tilde.size() != static_cast<std::size_t>(n))
        throw ParameterError("field length does not match the neighborhood cache");
    NeighborhoodStats stats(n);
    for (int e = 0; e < n; ++e) {
        double lo = rho_tilde[e];
        double hi = lo;
        for (int k : neighbors[e]) {
            lo = std::min(lo, rho_tilde[k]);
            hi = std::max(hi, rho_tilde[k]);
        }
        stats[e] = {lo, hi};
    }
    return stats;
}

NeighborhoodStats neighborhood_stats(const StructuredGrid& grid, std::span<const double> rho_tilde,
                                     double r)
{
    return neighborhood_stats(NeighborhoodCache(grid, r), rho_tilde);
}

double dgi_project(double rho_tilde, const LocalStats& stats, double beta_hat)
{
    const double d = stats.variation();
    if (d < kDegenerateVariation) return rho_tilde;
    if (rho_tilde == stats.min || rho_tilde == stats.max) return rho_tilde;
    const double local = (rho_tilde - stats.min) / d;
    const double out
        = d * smoothed_heaviside(local, beta_hat * d, ProjectionParams::eta_hat) + stats.min;
    // Frozen statistics may see inputs outside [min, max]; the map then extends smoothly.
    if (rho_tilde >= stats.min && rho_tilde <= stats.max)
        return std::clamp(out, stats.min, stats.max);
    return std::clamp(out, 0.0, 1.0);
}

double dgi_derivative(double rho_tilde, const LocalStats& stats, double beta_hat)
{
    const double d = stats.variation();
    if (d < kDegenerateVariation) return 1.0;
    const double local = (rho_tilde - stats.min) / d;
    return smoothed_heaviside_derivative(local, beta_hat * d, ProjectionParams::eta_hat);
}

void ProjectionParams::validate() const
{
    check_threshold(rho_low);
    check_lt_sharpness(beta_bar);
    if (!(beta_hat >= 0.0)) throw ParameterError("DGI sharpness must be non-negative");
}

RegularizationChain::RegularizationChain(const StructuredGrid& grid, double filter_radius,
                                         bool radius_is_length_scale)
    : filter_(grid, filter_radius, radius_is_length_scale), neighbors_(grid, filter_radius)
{
}

ChainState RegularizationChain::forward(const ElementField& raw, const ProjectionParams& params,
                                        const NeighborhoodStats* frozen) const
{
    params.validate();
    const std::size_t n = raw.size();
    std::vector<double> filtered = filter_.apply(raw.values());

    NeighborhoodStats stats;
    std::vector<double> dgi = filtered;
    std::vector<double> d_dgi(n, 1.0);
    if (params.dgi_enabled) {
        if (frozen) {
            if (frozen->size() != n) throw ContractViolation("frozen statistics length mismatch");
            stats = *frozen;
        } else {
            stats = neighborhood_stats(neighbors_, filtered);
        }
        for (std::size_t e = 0; e < n; ++e) {
            dgi[e] = dgi_project(filtered[e], stats[e], params.beta_hat);
            d_dgi[e] = dgi_derivative(filtered[e], stats[e], params.beta_hat);
        }
    }

    std::vector<double> physical = dgi;
    std::vector<double> d_lt(n, 1.0);
    if (params.lt_enabled) {
        for (std::size_t e = 0; e < n; ++e) {
            physical[e] = lt_project(dgi[e], params.beta_bar, params.rho_low);
            d_lt[e] = lt_project_derivative(dgi[e], params.beta_bar, params.rho_low);
        }
    }

    return ChainState{ElementField(std::move(filtered), Stage::filtered),
                      ElementField(std::move(dgi), Stage::dgi),
                      ElementField(std::move(physical), Stage::physical),
                      std::move(stats),
                      std::move(d_dgi),
                      std::move(d_lt),
                      raw.revision()};
}

std::vector<double> RegularizationChain::physical_values(std::span<const double> raw,
                                                         const ProjectionParams& params) const
{
    std::vector<double> v = filter_.apply(raw);
    if (params.dgi_enabled) {
        const NeighborhoodStats stats = neighborhood_stats(neighbors_, v);
        for (std::size_t e = 0; e < v.size(); ++e)
            v[e] = dgi_project(v[e], stats[e], params.beta_hat);
    }
    if (params.lt_enabled)
        for (double& x : v) x = lt_project(x, params.beta_bar, params.rho_low);
    return v;
}

std::vector<double> RegularizationChain::gradient(const ChainState& state,
                                                  std::span<const double> d_physical) const
{
    const std::size_t n = state.d_lt.size();
    if (d_physical.size() != n) throw ParameterError("gradient length mismatch");
    std::vector<double> g(n);
    for (std::size_t e = 0; e < n; ++e) g[e] = d_physical[e] * state.d_lt[e] * state.d_dgi[e];
    return filter_.apply_transpose(g);
}

std::vector<double> RegularizationChain::gradient(const ElementField& raw, const ChainState& state,
                                                  std::span<const double> d_physical) const
{
    if (raw.revision() != state.raw_revision)
        throw ContractViolation("chain cache was built from a different design revision");
    return gradient(state, d_physical);
}

ChainState regularize_chain(const RegularizationChain& chain, const ElementField& raw,
                            const ProjectionParams& params)
{
    return chain.forward(raw, params);
}

std::vector<double> chain_gradient(const RegularizationChain& chain, const ElementField& raw,
                                   const ChainState& state, std::span<const double> d_physical)
{
    return chain.gradient(raw, state, d_physical);
}

} // namespace vtto
