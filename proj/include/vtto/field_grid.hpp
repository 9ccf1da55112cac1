#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vtto {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/**
 * Fixed rectangular grid of square elements.
 *
 * Elements are numbered row by row, x fastest: e = j * nx + i for the cell in
 * column i and row j (row 0 at the bottom). Nodes follow the same pattern on
 * the (nx+1) x (ny+1) lattice.
 */
class StructuredGrid {
public:
    StructuredGrid(int nx, int ny, double h, Point origin = {});

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    Point origin() const { return origin_; }

    int element_count() const { return nx_ * ny_; }
    int node_count() const { return (nx_ + 1) * (ny_ + 1); }

    double width() const { return nx_ * h_; }
    double height() const { return ny_ * h_; }

    /// Unit out-of-plane reference thickness, so v_e = h^2.
    double element_volume() const { return h_ * h_; }
    double total_volume() const { return element_volume() * element_count(); }
    std::vector<double> element_volumes() const;

    int element_index(int i, int j) const { return j * nx_ + i; }
    int node_index(int i, int j) const { return j * (nx_ + 1) + i; }
    int element_column(int e) const { return e % nx_; }
    int element_row(int e) const { return e / nx_; }

    Point element_center(int e) const;
    Point node_position(int n) const;

    /// Node ids of element e, counter-clockwise from the lower-left corner.
    std::array<int, 4> element_nodes(int e) const;

    bool contains(Point p) const;
    /// Element containing p; points on the upper/right boundary map to the last cell.
    int element_at(Point p) const;

    void check_element(int e) const;

private:
    int nx_;
    int ny_;
    double h_;
    Point origin_;
};

StructuredGrid build_grid(int nx, int ny, double h);

/// Neighborhood radius actually used: never below 1.5h so that the immediate ring exists.
double effective_radius(const StructuredGrid& grid, double r);

/// Elements whose centers lie within effective_radius(grid, r) of the center of e.
std::vector<int> neighborhood(const StructuredGrid& grid, int e, double r);

/// All neighborhoods of a grid for a fixed radius, stored in compressed rows.
class NeighborhoodCache {
public:
    NeighborhoodCache(const StructuredGrid& grid, double r);

    std::span<const int> operator[](int e) const
    {
        return {indices_.data() + offsets_[e], indices_.data() + offsets_[e + 1]};
    }
    int element_count() const { return static_cast<int>(offsets_.size()) - 1; }
    double radius() const { return radius_; }

private:
    double radius_;
    std::vector<int> offsets_;
    std::vector<int> indices_;
};

enum class Stage { raw, filtered, dgi, physical };

std::string_view stage_name(Stage s);

/**
 * One density value per element at a given stage of the regularization chain.
 *
 * Every mutation draws a fresh revision number from a process-wide counter;
 * solutions and caches record the revision they were computed from.
 */
class ElementField {
public:
    ElementField(const StructuredGrid& grid, Stage stage, double fill);
    ElementField(std::vector<double> values, Stage stage);

    std::size_t size() const { return values_.size(); }
    Stage stage() const { return stage_; }
    std::uint64_t revision() const { return revision_; }

    std::span<const double> values() const { return values_; }
    double operator[](std::size_t e) const { return values_[e]; }

    void set(std::size_t e, double v);
    void assign(std::vector<double> values);

private:
    void bump();

    std::vector<double> values_;
    Stage stage_;
    std::uint64_t revision_ = 0;
};

} // namespace vtto
