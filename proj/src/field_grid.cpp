#include "vtto/field_grid.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <string>

#include "vtto/errors.hpp"

namespace vtto {

StructuredGrid::StructuredGrid(int nx, int ny, double h, Point origin)
    : nx_(nx), ny_(ny), h_(h), origin_(origin)
{
    if (nx < 1 || ny < 1)
        throw ConfigError("grid needs at least one element per direction, got "
                          + std::to_string(nx) + "x" + std::to_string(ny));
    if (!(h > 0.0) || !std::isfinite(h))
        throw ConfigError("element size h must be positive");
}

std::vector<double> StructuredGrid::element_volumes() const
{
    return std::vector<double>(element_count(), element_volume());
}

Point StructuredGrid::element_center(int e) const
{
    check_element(e);
    return {origin_.x + (element_column(e) + 0.5) * h_,
            origin_.y + (element_row(e) + 0.5) * h_};
}

Point StructuredGrid::node_position(int n) const
{
    const int i = n % (nx_ + 1);
    const int j = n / (nx_ + 1);
    return {origin_.x + i * h_, origin_.y + j * h_};
}

std::array<int, 4> StructuredGrid::element_nodes(int e) const
{
    const int i = element_column(e);
    const int j = element_row(e);
    return {node_index(i, j), node_index(i + 1, j), node_index(i + 1, j + 1),
            node_index(i, j + 1)};
}

bool StructuredGrid::contains(Point p) const
{
    return p.x >= origin_.x && p.x <= origin_.x + width() && p.y >= origin_.y
           && p.y <= origin_.y + height();
}

int StructuredGrid::element_at(Point p) const
{
    if (!contains(p))
        throw GeometryError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y)
                            + ") lies outside the domain");
    const int i = std::min(nx_ - 1, static_cast<int>(std::floor((p.x - origin_.x) / h_)));
    const int j = std::min(ny_ - 1, static_cast<int>(std::floor((p.y - origin_.y) / h_)));
    return element_index(i, j);
}

void StructuredGrid::check_element(int e) const
{
    if (e < 0 || e >= element_count())
        throw std::out_of_range("element id " + std::to_string(e) + " out of range [0, "
                                + std::to_string(element_count()) + ")");
}

StructuredGrid build_grid(int nx, int ny, double h) { return StructuredGrid(nx, ny, h); }

double effective_radius(const StructuredGrid& grid, double r)
{
    if (r < 0.0 || !std::isfinite(r))
        throw ParameterError("neighborhood radius must be non-negative");
    return std::max(r, 1.5 * grid.h());
}

namespace {

// Appends the neighborhood of e (ascending ids), scanning only the bounding box.
void collect_neighbors(const StructuredGrid& grid, int e, double r_eff, std::vector<int>& out)
{
    const int ci = grid.element_column(e);
    const int cj = grid.element_row(e);
    const int reach = static_cast<int>(std::floor(r_eff / grid.h() + 1e-12));
    // Compare squared distances in cell units to keep the test exact on the lattice.
    const double lim = r_eff / grid.h();
    const double lim2 = lim * lim * (1.0 + 1e-12);
    for (int j = std::max(0, cj - reach); j <= std::min(grid.ny() - 1, cj + reach); ++j) {
        for (int i = std::max(0, ci - reach); i <= std::min(grid.nx() - 1, ci + reach); ++i) {
            const double di = i - ci;
            const double dj = j - cj;
            if (di * di + dj * dj <= lim2)
                out.push_back(grid.element_index(i, j));
        }
    }
}

} // namespace

std::vector<int> neighborhood(const StructuredGrid& grid, int e, double r)
{
    grid.check_element(e);
    std::vector<int> out;
    collect_neighbors(grid, e, effective_radius(grid, r), out);
    return out;
}

NeighborhoodCache::NeighborhoodCache(const StructuredGrid& grid, double r)
    : radius_(effective_radius(grid, r))
{
    offsets_.reserve(grid.element_count() + 1);
    offsets_.push_back(0);
    for (int e = 0; e < grid.element_count(); ++e) {
        collect_neighbors(grid, e, radius_, indices_);
        offsets_.push_back(static_cast<int>(indices_.size()));
    }
}

std::string_view stage_name(Stage s)
{
    switch (s) {
    case Stage::raw: return "raw";
    case Stage::filtered: return "filtered";
    case Stage::dgi: return "dgi";
    case Stage::physical: return "physical";
    }
    return "unknown";
}

namespace {

std::atomic<std::uint64_t> g_revision{0};

void check_density_range(std::span<const double> v)
{
    for (double x : v)
        if (!(x >= 0.0 && x <= 1.0))
            throw ParameterError("density value " + std::to_string(x) + " outside [0, 1]");
}

} // namespace

ElementField::ElementField(const StructuredGrid& grid, Stage stage, double fill)
    : values_(grid.element_count(), fill), stage_(stage)
{
    check_density_range(values_);
    bump();
}

ElementField::ElementField(std::vector<double> values, Stage stage)
    : values_(std::move(values)), stage_(stage)
{
    check_density_range(values_);
    bump();
}

void ElementField::set(std::size_t e, double v)
{
    if (!(v >= 0.0 && v <= 1.0))
        throw ParameterError("density value " + std::to_string(v) + " outside [0, 1]");
    values_.at(e) = v;
    bump();
}

void ElementField::assign(std::vector<double> values)
{
    if (values.size() != values_.size())
        throw ParameterError("field length mismatch");
    check_density_range(values);
    values_ = std::move(values);
    bump();
}

void ElementField::bump() { revision_ = ++g_revision; }

} // namespace vtto
