#include "vtto/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vtto/diagnostics.hpp"

namespace vtto {

void ContinuationSchedule::validate() const
{
    auto ramp = [](const char* name, double init, double max, double rate) {
        if (!(rate > 1.0))
            throw ConfigError(std::string("continuation rate for ") + name + " must be > 1");
        if (!(max >= init))
            throw ConfigError(std::string("maximum of ") + name + " below its initial value");
    };
    ramp("p", p_init, p_max, c_p);
    ramp("beta_hat", beta_hat_init, beta_hat_max, c_hat);
    ramp("beta_bar", beta_bar_init, beta_bar_max, c_bar);
    if (!(p_init >= 1.0)) throw ConfigError("p_init must be >= 1");
    if (!(beta_bar_init >= 1.0)) throw ConfigError("beta_bar_init must be >= 1");
    if (!(beta_hat_init > 0.0)) throw ConfigError("beta_hat_init must be positive");
}

ContinuationState update_continuation(const ContinuationSchedule& sched,
                                      const ContinuationState& state)
{
    ContinuationState next = state;
    const bool p_done = !sched.ramp_p || state.p >= sched.p_max;
    if (sched.ramp_p) next.p = std::min(sched.c_p * state.p, sched.p_max);
    if (sched.mode == ContinuationMode::simultaneous || p_done) {
        if (sched.ramp_beta_hat)
            next.beta_hat = std::min(sched.c_hat * state.beta_hat, sched.beta_hat_max);
        if (sched.ramp_beta_bar)
            next.beta_bar = std::min(sched.c_bar * state.beta_bar, sched.beta_bar_max);
    }
    return next;
}

bool continuation_complete(const ContinuationSchedule& sched, const ContinuationState& state)
{
    return (!sched.ramp_p || state.p >= sched.p_max)
           && (!sched.ramp_beta_hat || state.beta_hat >= sched.beta_hat_max)
           && (!sched.ramp_beta_bar || state.beta_bar >= sched.beta_bar_max);
}

void OptimizerConfig::validate() const
{
    if (!(step_min > 0.0 && step_min <= step_init))
        throw ConfigError("step lengths must satisfy 0 < step_min <= step_init");
    if (!(step_decay > 0.0 && step_decay < 1.0)) throw ConfigError("step_decay must lie in (0, 1)");
    if (!(vol_frac_target > 0.0 && vol_frac_target <= 1.0))
        throw ConfigError("vol_frac must lie in (0, 1]");
    if (!(rho_init > 0.0 && rho_init <= 1.0)) throw ConfigError("rho_init must lie in (0, 1]");
    if (!(tol_drho > 0.0)) throw ConfigError("tol_drho must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
}

namespace {

std::vector<double> scaled_update(std::span<const double> rho, std::span<const double> ratio,
                                  double step, double lambda)
{
    std::vector<double> out(rho.size());
    for (std::size_t e = 0; e < rho.size(); ++e) {
        const double b = std::max(kRatioFloor, ratio[e] / lambda);
        out[e] = std::clamp(rho[e] * std::exp(step * std::log(b)), 0.0, 1.0);
    }
    return out;
}

} // namespace

GocmStep gocm_update(std::span<const double> rho, std::span<const double> dF,
                     std::span<const double> dG, double step, double vol_target,
                     const VolumeFunction& volume_of)
{
    const std::size_t n = rho.size();
    if (dF.size() != n || dG.size() != n) throw ParameterError("sensitivity length mismatch");
    if (!(step >= 0.0)) throw ParameterError("step length must be non-negative");

    std::vector<double> ratio(n);
    double weighted = 0.0;
    double mass = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
        if (!(dG[e] > 0.0)) throw ParameterError("constraint sensitivity must be positive");
        ratio[e] = std::max(0.0, -dF[e]) / dG[e];
        weighted += rho[e] * ratio[e];
        mass += rho[e];
    }
    double guess = mass > 0.0 && weighted > 0.0 ? weighted / mass : 1.0;
    if (step == 0.0) {
        GocmStep s{{rho.begin(), rho.end()}, guess, volume_of(rho), true};
        return s;
    }

    auto eval = [&](double lambda) {
        GocmStep s;
        s.lambda = lambda;
        s.rho = scaled_update(rho, ratio, step, lambda);
        s.volume = volume_of(s.rho);
        return s;
    };

    // Volume decreases with lambda; bracket the target by doubling.
    GocmStep lo = eval(guess);
    GocmStep hi = lo;
    for (int k = 0; lo.volume < vol_target; ++k) {
        if (k == 100) {
            lo.constraint_active = false;
            return lo;
        }
        hi = lo;
        lo = eval(lo.lambda / 2.0);
    }
    for (int k = 0; hi.volume > vol_target; ++k) {
        if (k == 100)
            throw NumericalError("multiplier bracket not found after 100 doublings");
        lo = hi;
        hi = eval(hi.lambda * 2.0);
    }

    GocmStep best = std::abs(lo.volume - vol_target) < std::abs(hi.volume - vol_target) ? lo : hi;
    for (int k = 0; k < 200 && std::abs(best.volume - vol_target) > 1e-9; ++k) {
        if (hi.lambda / lo.lambda < 1.0 + 1e-15) break;
        GocmStep mid = eval(std::sqrt(lo.lambda * hi.lambda));
        if (mid.volume > vol_target) lo = mid;
        else hi = mid;
        if (std::abs(mid.volume - vol_target) < std::abs(best.volume - vol_target))
            best = std::move(mid);
    }
    if (std::abs(best.volume - vol_target) > 1e-6)
        throw NumericalError("multiplier bisection stalled at volume "
                             + std::to_string(best.volume));
    return best;
}

double delta_rho_mean(std::span<const double> rho_old, std::span<const double> rho_new,
                      std::span<const double> volumes)
{
    if (rho_old.size() != rho_new.size() || rho_old.size() != volumes.size())
        throw ParameterError("field length mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t e = 0; e < volumes.size(); ++e) {
        num += volumes[e] * std::abs(rho_new[e] - rho_old[e]);
        den += volumes[e];
    }
    return num / den;
}

void ProblemSetup::validate() const
{
    material.validate();
    bc.validate(grid);
    schedule.validate();
    optimizer.validate();
    if (!(filter_radius > 0.0)) throw ConfigError("filter_radius must be positive");
    if (!(rho_low > 0.0 && rho_low < 1.0)) throw ConfigError("rho_low must lie in (0, 1)");
}

ContinuationSchedule ProblemSetup::effective_schedule() const
{
    ContinuationSchedule s = schedule;
    s.ramp_p = penalized_reference || lt_simp;
    s.ramp_beta_bar = !penalized_reference && lt_projection;
    s.ramp_beta_hat = !penalized_reference && dgi;
    return s;
}

ProjectionParams ProblemSetup::projection_params(const ContinuationState& state) const
{
    ProjectionParams pp;
    pp.rho_low = rho_low;
    pp.beta_bar = state.beta_bar;
    pp.beta_hat = state.beta_hat;
    pp.lt_enabled = !penalized_reference && lt_projection;
    pp.dgi_enabled = !penalized_reference && dgi;
    return pp;
}

Penalization ProblemSetup::penalization(const ContinuationState& state) const
{
    if (penalized_reference) return {PenaltyKind::global, state.p, rho_low};
    return {PenaltyKind::selective, lt_simp ? state.p : 1.0, rho_low};
}

double volume_fraction(const StructuredGrid& grid, std::span<const double> rho)
{
    // Uniform cells: the volume-weighted mean is the arithmetic mean.
    (void)grid;
    return std::accumulate(rho.begin(), rho.end(), 0.0) / static_cast<double>(rho.size());
}

OptimizationResult run_optimization(const ProblemSetup& setup, const IterationObserver& observer)
{
    setup.validate();
    const StructuredGrid& grid = setup.grid;
    const OptimizerConfig& opt = setup.optimizer;
    const ContinuationSchedule sched = setup.effective_schedule();
    const bool on_physical = setup.volume_measure == VolumeMeasure::physical;

    RegularizationChain chain(grid, setup.filter_radius, setup.radius_is_length_scale);
    ElasticitySolver solver(grid, setup.bc, setup.material, setup.solver);
    const std::vector<double> volumes = grid.element_volumes();
    const std::vector<double> d_volume(grid.element_count(), 1.0 / grid.element_count());

    ContinuationState cont = sched.initial();
    ElementField rho(grid, Stage::raw, opt.rho_init);
    ChainState state = chain.forward(rho, setup.projection_params(cont));
    std::vector<IterationRecord> history;
    double step = opt.step_init;
    bool converged = false;

    for (int it = 0; it < opt.max_iters; ++it) {
        const ProjectionParams params = setup.projection_params(cont);
        const Penalization pen = setup.penalization(cont);

        StateSolution sol;
        try {
            sol = solver.solve(state.physical, pen);
        } catch (const NumericalError& err) {
            throw OptimizationFailure("state solve failed at iteration " + std::to_string(it)
                                          + ": " + err.what(),
                                      {rho.values().begin(), rho.values().end()}, history);
        }
        const auto dF_phys = solver.compliance_sensitivity(sol, state.physical, pen);
        const auto dF = chain.gradient(rho, state, dF_phys);

        std::vector<double> dG;
        VolumeFunction measure;
        if (on_physical) {
            dG = chain.gradient(rho, state, d_volume);
            measure = [&](std::span<const double> x) {
                return volume_fraction(grid, chain.physical_values(x, params));
            };
        } else {
            dG = d_volume;
            measure = [&](std::span<const double> x) { return volume_fraction(grid, x); };
        }
        GocmStep upd = gocm_update(rho.values(), dF, dG, step, opt.vol_frac_target, measure);

        IterationRecord rec;
        rec.iter = it;
        rec.compliance = sol.compliance;
        rec.vol_frac = volume_fraction(grid, on_physical ? state.physical.values() : rho.values());
        rec.drho_mean = delta_rho_mean(rho.values(), upd.rho, volumes);
        rec.p = pen.p;
        rec.beta_hat = params.dgi_enabled ? params.beta_hat : 0.0;
        rec.beta_bar = params.lt_enabled ? params.beta_bar : 1.0;
        rec.step = step;
        rec.lt_fraction = low_thickness_fraction(state.physical.values(), volumes, setup.rho_low);
        history.push_back(rec);
        if (observer) observer(rec, rho, state);

        rho.assign(std::move(upd.rho));
        step = std::max(step * opt.step_decay, opt.step_min);
        converged = rec.drho_mean < opt.tol_drho && continuation_complete(sched, cont);
        if (!converged) cont = update_continuation(sched, cont);
        state = chain.forward(rho, setup.projection_params(cont));
        if (converged) break;
    }

    const Penalization pen = setup.penalization(cont);
    const StateSolution final_sol = solver.solve(state.physical, pen);
    OptimizationResult result{rho, state, std::move(history), cont, converged, final_sol.compliance,
                              0.0, 0.0};
    result.vol_frac = volume_fraction(grid, on_physical ? state.physical.values() : rho.values());
    result.lt_fraction = low_thickness_fraction(state.physical.values(), volumes, setup.rho_low);
    return result;
}

} // namespace vtto
