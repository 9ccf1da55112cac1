#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtto/optimizer.hpp"

namespace vtto {

struct WidthSegment {
    Point p0;
    Point p1;
    int samples = 200;
};

/// Load case description kept separately so that suites can rebuild it on other grids.
struct LoadSpec {
    Edge clamp = Edge::left;
    std::optional<Point> at; ///< defaults to mid-height of the right edge
    double fx = 0.0;
    double fy = -1.0;
};

struct RunConfig {
    ProblemSetup setup;
    LoadSpec load;
    std::filesystem::path output_dir = "out";
    int snapshot_every = 0; ///< 0 writes only the final fields
    std::uint64_t seed = 1;
    int gradcheck_probes = 8;
    double gradcheck_step = 1e-6;
    std::vector<WidthSegment> width_segments;
    double width_lo = 0.05;
    double width_hi = 0.95;
    /// Reference length for the radius multiples of the dgi_radius_sharpness suite.
    double suite_radius_unit = 0.25;

    /// Rebuilds the boundary conditions from `load` on the current grid.
    void rebuild_boundary_conditions();
};

/**
 * Reads a flat `key = value` file; `#` starts a comment. Omitted keys keep
 * their defaults, unknown or repeated keys are rejected (width_segment may repeat).
 */
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(std::string_view text);

/// Effective value of every key, in the same format parse_config accepts.
std::string format_config(const RunConfig& cfg);

} // namespace vtto
