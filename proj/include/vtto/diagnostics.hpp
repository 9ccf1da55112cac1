#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vtto/field_grid.hpp"

namespace vtto {

struct ProblemSetup;
struct ContinuationSchedule;
struct ContinuationState;

/// Densities at or below this value count as acceptable void.
inline constexpr double kAcceptableVoid = 1e-3;

/// Volume share of material elements whose density lies strictly in (kAcceptableVoid, rho_low).
double low_thickness_fraction(std::span<const double> rho_physical,
                              std::span<const double> volumes, double rho_low);

struct LineProfile {
    Point start;
    Point end;
    std::vector<Point> points;
    std::vector<double> arc_length;
    std::vector<double> values;
};

/// n equally spaced samples on [p0, p1], each taking the value of its containing element.
LineProfile line_profile(const StructuredGrid& grid, std::span<const double> field, Point p0,
                         Point p1, int n);

/**
 * Arc length of the first rising edge: from the last sample below lo * peak
 * to the first subsequent crossing of hi * peak, both located by linear
 * interpolation. Empty when the profile has no such edge.
 */
std::optional<double> transition_width(const LineProfile& profile, double lo = 0.05,
                                       double hi = 0.95);

/// Continuation state with every active ramp at its maximum.
ContinuationState final_continuation_state(const ContinuationSchedule& sched);

struct GradientCheckResult {
    double max_rel_error = 0.0;
    std::vector<int> probes;
    std::vector<double> analytic;
    std::vector<double> numeric;
};

/**
 * Compares dF_c/d rho_raw from the chain rule against central differences on a
 * random design in [0.2, 0.9]. With DGI on, the perturbed objectives reuse the
 * neighborhood statistics of the base point. The continuation parameters are
 * taken at `state`.
 */
GradientCheckResult gradient_check(const ProblemSetup& setup, const ContinuationState& state,
                                   int n_probe, double fd_step, std::uint64_t seed = 1);

/// Same, at the end of the effective continuation schedule.
GradientCheckResult gradient_check(const ProblemSetup& setup, int n_probe, double fd_step,
                                   std::uint64_t seed = 1);

} // namespace vtto
