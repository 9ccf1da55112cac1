#include "vtto/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vtto/errors.hpp"

namespace vtto {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {})
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::out | mode);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void check_size(const StructuredGrid& grid, std::span<const double> field)
{
    if (field.size() != static_cast<std::size_t>(grid.element_count()))
        throw ParameterError("field length does not match the grid");
}

std::string g9(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_field_text(const std::filesystem::path& path, const StructuredGrid& grid,
                      std::span<const double> field)
{
    check_size(grid, field);
    auto out = open_out(path);
    for (int j = grid.ny() - 1; j >= 0; --j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (i) out << ' ';
            out << g9(field[grid.element_index(i, j)]);
        }
        out << '\n';
    }
}

std::vector<double> read_field_text(const std::filesystem::path& path, const StructuredGrid& grid)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<double> field(grid.element_count());
    std::string line;
    int j = grid.ny() - 1;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (j < 0) throw std::runtime_error(path.string() + ": too many rows");
        std::istringstream row(line);
        int i = 0;
        double v = 0.0;
        while (row >> v) {
            if (i >= grid.nx()) throw std::runtime_error(path.string() + ": row too long");
            field[grid.element_index(i++, j)] = v;
        }
        if (!row.eof() || i != grid.nx())
            throw std::runtime_error(path.string() + ": malformed row");
        --j;
    }
    if (j != -1) throw std::runtime_error(path.string() + ": too few rows");
    return field;
}

void write_field_pgm(const std::filesystem::path& path, const StructuredGrid& grid,
                     std::span<const double> field)
{
    check_size(grid, field);
    auto out = open_out(path, std::ios::binary);
    out << "P5\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
    for (int j = grid.ny() - 1; j >= 0; --j)
        for (int i = 0; i < grid.nx(); ++i) {
            const double v = std::clamp(field[grid.element_index(i, j)], 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::floor(v * 255.0 + 0.5))));
        }
}

void write_thickness_vtk(const std::filesystem::path& path, const StructuredGrid& grid,
                         std::span<const double> field)
{
    check_size(grid, field);
    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\nthickness\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << grid.nx() + 1 << ' ' << grid.ny() + 1 << " 1\n";
    out << "ORIGIN " << g17(grid.origin().x) << ' ' << g17(grid.origin().y) << " 0\n";
    out << "SPACING " << g17(grid.h()) << ' ' << g17(grid.h()) << " 1\n";
    out << "CELL_DATA " << grid.element_count() << "\nSCALARS thickness double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : field) out << g9(v) << '\n';
}

std::string format_history_row(const IterationRecord& r)
{
    std::ostringstream os;
    os << r.iter << ',' << g17(r.compliance) << ',' << g17(r.vol_frac) << ',' << g17(r.drho_mean)
       << ',' << g17(r.p) << ',' << g17(r.beta_hat) << ',' << g17(r.beta_bar) << ','
       << g17(r.step) << ',' << g17(r.lt_fraction);
    return os.str();
}

void write_history_csv(const std::filesystem::path& path, std::span<const IterationRecord> history)
{
    auto out = open_out(path);
    out << kHistoryHeader << '\n';
    for (const auto& r : history) out << format_history_row(r) << '\n';
}

void write_metrics(const std::filesystem::path& path, const RunMetrics& m)
{
    auto out = open_out(path);
    out << "status = " << m.status << '\n';
    out << "iterations = " << m.iterations << '\n';
    out << "converged = " << (m.converged ? "true" : "false") << '\n';
    out << "compliance = " << g17(m.compliance) << '\n';
    out << "vol_frac = " << g17(m.vol_frac) << '\n';
    out << "lt_fraction = " << g17(m.lt_fraction) << '\n';
    out << "p = " << g17(m.continuation.p) << '\n';
    out << "beta_hat = " << g17(m.continuation.beta_hat) << '\n';
    out << "beta_bar = " << g17(m.continuation.beta_bar) << '\n';
    for (std::size_t k = 0; k < m.transition_widths.size(); ++k)
        out << "transition_width_" << k << " = " << g17(m.transition_widths[k]) << '\n';
}

} // namespace vtto
