#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vtto/field_grid.hpp"
#include "vtto/optimizer.hpp"

namespace vtto {

/// Plain text, one grid row per line with the top row first, values printed with %.9g.
void write_field_text(const std::filesystem::path& path, const StructuredGrid& grid,
                      std::span<const double> field);

/// Inverse of write_field_text; the shape must match `grid`.
std::vector<double> read_field_text(const std::filesystem::path& path, const StructuredGrid& grid);

/// Binary 8-bit greyscale image, one pixel per element, white = 1.
void write_field_pgm(const std::filesystem::path& path, const StructuredGrid& grid,
                     std::span<const double> field);

/// Legacy VTK structured points with the physical field as cell data named "thickness".
void write_thickness_vtk(const std::filesystem::path& path, const StructuredGrid& grid,
                         std::span<const double> field);

inline constexpr const char* kHistoryHeader
    = "iter,compliance,vol_frac,drho_mean,p,beta_hat,beta_bar,step,lt_fraction";

std::string format_history_row(const IterationRecord& rec);
void write_history_csv(const std::filesystem::path& path, std::span<const IterationRecord> history);

struct RunMetrics {
    std::string status;
    int iterations = 0;
    bool converged = false;
    double compliance = 0.0;
    double vol_frac = 0.0;
    double lt_fraction = 0.0;
    ContinuationState continuation;
    std::vector<double> transition_widths; ///< NaN where a segment has no edge
};

void write_metrics(const std::filesystem::path& path, const RunMetrics& m);

} // namespace vtto
