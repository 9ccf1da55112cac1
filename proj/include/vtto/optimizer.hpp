#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vtto/elasticity.hpp"
#include "vtto/errors.hpp"
#include "vtto/field_grid.hpp"
#include "vtto/projections.hpp"

namespace vtto {

enum class ContinuationMode { sequential, simultaneous };

struct ContinuationState {
    double p = 1.0;
    double beta_hat = 0.1;
    double beta_bar = 1.0;
};

/**
 * Geometric ramps for the SIMP exponent and both projection sharpnesses.
 *
 * A ramp that is switched off keeps its parameter at the initial value and
 * counts as finished. In sequential mode the two sharpness ramps start only
 * once p has reached p_max (immediately when the p ramp is off).
 */
struct ContinuationSchedule {
    double p_init = 1.0;
    double p_max = 3.0;
    double c_p = 1.03;
    double beta_hat_init = 0.1;
    double beta_hat_max = 10.0;
    double c_hat = 1.05;
    double beta_bar_init = 1.0;
    double beta_bar_max = 25.0;
    double c_bar = 1.05;
    ContinuationMode mode = ContinuationMode::sequential;
    bool ramp_p = true;
    bool ramp_beta_hat = true;
    bool ramp_beta_bar = true;

    void validate() const;
    ContinuationState initial() const { return {p_init, beta_hat_init, beta_bar_init}; }
};

ContinuationState update_continuation(const ContinuationSchedule& sched,
                                      const ContinuationState& state);
bool continuation_complete(const ContinuationSchedule& sched, const ContinuationState& state);

struct OptimizerConfig {
    double step_init = 0.05;
    double step_decay = 0.98;
    double step_min = 1e-4;
    double vol_frac_target = 0.3;
    double rho_init = 0.3;
    double tol_drho = 1e-4;
    int max_iters = 1000;

    void validate() const;
};

/// Maps a candidate design to the volume fraction the constraint is measured on.
using VolumeFunction = std::function<double(std::span<const double>)>;

struct GocmStep {
    std::vector<double> rho;
    double lambda = 0.0;
    double volume = 0.0;
    bool constraint_active = true;
};

/// Lower bound on the optimality ratio B_e.
inline constexpr double kRatioFloor = 1e-10;

/**
 * Multiplicative optimality-criteria update rho * B^step with
 * B = max(kRatioFloor, -dF / (lambda dG)). The multiplier is bisected on a
 * log scale until `volume_of` of the clamped update hits the target within 1e-6.
 */
GocmStep gocm_update(std::span<const double> rho, std::span<const double> dF,
                     std::span<const double> dG, double step, double vol_target,
                     const VolumeFunction& volume_of);

/// Volume-weighted mean of |rho_new - rho_old|.
double delta_rho_mean(std::span<const double> rho_old, std::span<const double> rho_new,
                      std::span<const double> volumes);

enum class VolumeMeasure { physical, raw };

/// Everything that defines one optimization run.
struct ProblemSetup {
    StructuredGrid grid{80, 40, 0.25};
    BoundaryConditions bc = cantilever(grid);
    MaterialModel material;
    double filter_radius = 0.375;
    bool radius_is_length_scale = false;
    double rho_low = 0.1;
    bool lt_simp = true;
    bool lt_projection = true;
    bool dgi = true;
    /// Classic SIMP reference: global rho^p with continuation, no LT or DGI maps.
    bool penalized_reference = false;
    ContinuationSchedule schedule;
    OptimizerConfig optimizer;
    VolumeMeasure volume_measure = VolumeMeasure::physical;
    LinearSolverKind solver = LinearSolverKind::direct;

    void validate() const;
    /// Schedule with the ramps of disabled features switched off.
    ContinuationSchedule effective_schedule() const;
    ProjectionParams projection_params(const ContinuationState& state) const;
    Penalization penalization(const ContinuationState& state) const;
};

struct IterationRecord {
    int iter = 0;
    double compliance = 0.0;
    double vol_frac = 0.0;
    double drho_mean = 0.0;
    double p = 1.0;
    double beta_hat = 0.0; ///< 0 when DGI is disabled
    double beta_bar = 1.0;
    double step = 0.0;
    double lt_fraction = 0.0;
};

struct OptimizationResult {
    ElementField raw;
    ChainState chain;
    std::vector<IterationRecord> history;
    ContinuationState continuation;
    bool converged = false;
    double compliance = 0.0; ///< of the final physical field
    double vol_frac = 0.0;
    double lt_fraction = 0.0;
};

/// Raised when a state solve fails mid-run; carries the design at the time of failure.
class OptimizationFailure : public NumericalError {
public:
    OptimizationFailure(const std::string& what, std::vector<double> last_design,
                        std::vector<IterationRecord> history)
        : NumericalError(what), last_design(std::move(last_design)), history(std::move(history))
    {
    }
    std::vector<double> last_design;
    std::vector<IterationRecord> history;
};

using IterationObserver
    = std::function<void(const IterationRecord&, const ElementField& raw, const ChainState&)>;

/// Volume fraction of a field measured with element volumes of `grid`.
double volume_fraction(const StructuredGrid& grid, std::span<const double> rho);

OptimizationResult run_optimization(const ProblemSetup& setup,
                                    const IterationObserver& observer = {});

} // namespace vtto
