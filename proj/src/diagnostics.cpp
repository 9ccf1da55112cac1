#include "vtto/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vtto/elasticity.hpp"
#include "vtto/errors.hpp"
#include "vtto/optimizer.hpp"
#include "vtto/projections.hpp"

namespace vtto {

double low_thickness_fraction(std::span<const double> rho_physical,
                              std::span<const double> volumes, double rho_low)
{
    if (rho_physical.size() != volumes.size()) throw ParameterError("field length mismatch");
    double undesired = 0.0;
    double material = 0.0;
    for (std::size_t e = 0; e < volumes.size(); ++e) {
        const double r = rho_physical[e];
        if (r <= kAcceptableVoid) continue;
        material += volumes[e];
        if (r < rho_low) undesired += volumes[e];
    }
    return material > 0.0 ? undesired / material : 0.0;
}

LineProfile line_profile(const StructuredGrid& grid, std::span<const double> field, Point p0,
                         Point p1, int n)
{
    if (n < 2) throw ParameterError("a line profile needs at least two samples");
    if (field.size() != static_cast<std::size_t>(grid.element_count()))
        throw ParameterError("field length does not match the grid");
    if (!grid.contains(p0) || !grid.contains(p1))
        throw GeometryError("profile segment leaves the domain");

    LineProfile prof{p0, p1, {}, {}, {}};
    const double length = std::hypot(p1.x - p0.x, p1.y - p0.y);
    for (int k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / (n - 1);
        const Point p{p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)};
        prof.points.push_back(p);
        prof.arc_length.push_back(t * length);
        prof.values.push_back(field[grid.element_at(p)]);
    }
    return prof;
}

std::optional<double> transition_width(const LineProfile& profile, double lo, double hi)
{
    const auto& v = profile.values;
    const auto& s = profile.arc_length;
    if (v.size() < 2 || !(lo < hi)) return std::nullopt;
    const double peak = *std::max_element(v.begin(), v.end());
    if (!(peak > 0.0)) return std::nullopt;
    const double lo_v = lo * peak;
    const double hi_v = hi * peak;

    std::optional<std::size_t> below;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < lo_v) {
            below = k;
            continue;
        }
        if (v[k] >= hi_v && below) {
            const std::size_t a = *below;
            const double s_lo = s[a] + (lo_v - v[a]) / (v[a + 1] - v[a]) * (s[a + 1] - s[a]);
            const double s_hi
                = s[k - 1] + (hi_v - v[k - 1]) / (v[k] - v[k - 1]) * (s[k] - s[k - 1]);
            return s_hi - s_lo;
        }
    }
    return std::nullopt;
}

ContinuationState final_continuation_state(const ContinuationSchedule& sched)
{
    ContinuationState st = sched.initial();
    if (sched.ramp_p) st.p = sched.p_max;
    if (sched.ramp_beta_hat) st.beta_hat = sched.beta_hat_max;
    if (sched.ramp_beta_bar) st.beta_bar = sched.beta_bar_max;
    return st;
}

GradientCheckResult gradient_check(const ProblemSetup& setup, const ContinuationState& state,
                                   int n_probe, double fd_step, std::uint64_t seed)
{
    setup.validate();
    if (n_probe < 1) throw ParameterError("need at least one probe");
    if (!(fd_step > 0.0 && fd_step < 0.05)) throw ParameterError("fd_step must lie in (0, 0.05)");

    const StructuredGrid& grid = setup.grid;
    const int n = grid.element_count();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.2, 0.9);
    std::vector<double> design(n);
    for (double& x : design) {
        do {
            x = dist(rng);
        } while (std::abs(x - setup.rho_low) < 5.0 * fd_step);
    }

    RegularizationChain chain(grid, setup.filter_radius, setup.radius_is_length_scale);
    ElasticitySolver solver(grid, setup.bc, setup.material, setup.solver);
    const ProjectionParams params = setup.projection_params(state);
    const Penalization pen = setup.penalization(state);

    const ElementField base(design, Stage::raw);
    const ChainState st = chain.forward(base, params);
    const StateSolution sol = solver.solve(st.physical, pen);
    const auto dF = chain.gradient(base, st, solver.compliance_sensitivity(sol, st.physical, pen));
    const NeighborhoodStats* frozen = params.dgi_enabled ? &st.stats : nullptr;

    auto objective = [&](const std::vector<double>& x) {
        const ChainState s = chain.forward(ElementField(x, Stage::raw), params, frozen);
        return solver.solve(s.physical, pen).compliance;
    };

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(n_probe, n));

    GradientCheckResult res;
    for (int e : order) {
        std::vector<double> x = design;
        x[e] = design[e] + fd_step;
        const double fp = objective(x);
        x[e] = design[e] - fd_step;
        const double fm = objective(x);
        const double fd = (fp - fm) / (2.0 * fd_step);
        const double err = std::abs(dF[e] - fd) / std::max(std::abs(fd), 1e-300);
        res.probes.push_back(e);
        res.analytic.push_back(dF[e]);
        res.numeric.push_back(fd);
        res.max_rel_error = std::max(res.max_rel_error, err);
    }
    return res;
}

GradientCheckResult gradient_check(const ProblemSetup& setup, int n_probe, double fd_step,
                                   std::uint64_t seed)
{
    return gradient_check(setup, final_continuation_state(setup.effective_schedule()), n_probe,
                          fd_step, seed);
}

} // namespace vtto
