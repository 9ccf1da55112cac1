#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vtto/config.hpp"
#include "vtto/export.hpp"
#include "vtto/optimizer.hpp"

namespace vtto {

enum ExitCode : int {
    kExitSuccess = 0,
    kExitConfigError = 1,
    kExitNumericalFailure = 2,
    kExitNotConverged = 3,
};

struct RunOutcome {
    int exit_code = kExitSuccess;
    RunMetrics metrics;
    std::string message;
    std::optional<OptimizationResult> result; ///< empty when the run failed
};

/**
 * Optimizes one configuration and writes its artifacts below cfg.output_dir:
 * config.txt, history.csv, metrics.txt, thickness.vtk, the four stage fields
 * as .txt and .pgm, and snapshots/ when snapshot_every > 0.
 */
RunOutcome run_single(const RunConfig& cfg, std::ostream* log = nullptr);

/// Transition width of the physical field on each configured segment (NaN if none).
std::vector<double> segment_widths(const RunConfig& cfg, std::span<const double> physical);

struct SuiteMember {
    std::string variant;
    std::string group; ///< members of a group share a normalization reference
    bool reference = false;
    RunConfig config;
};

std::vector<std::string> suite_names();

/// Variant matrix of a suite, each member writing to base.output_dir / suite / variant.
std::vector<SuiteMember> suite_members(const RunConfig& base, const std::string& suite);

struct SuiteRow {
    std::string variant;
    double filter_radius = 0.0;
    double beta_hat_max = 0.0; ///< 0 when DGI is off
    bool lt_simp = false;
    bool lt_projection = false;
    bool dgi = false;
    bool penalized = false;
    std::string status;
    int iterations = 0;
    double compliance = 0.0;
    double normalized_compliance = 0.0; ///< NaN when the member or its reference failed
    double vol_frac = 0.0;
    double lt_fraction = 0.0;
    std::vector<double> transition_widths;
};

/// Runs every member, then writes base.output_dir / suite / suite.csv.
std::vector<SuiteRow> run_ablation_suite(const RunConfig& base, const std::string& suite,
                                         std::ostream* log = nullptr);

void write_suite_csv(const std::filesystem::path& path, std::span<const SuiteRow> rows);

} // namespace vtto
