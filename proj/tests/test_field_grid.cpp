#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "vtto/errors.hpp"
#include "vtto/field_grid.hpp"

using namespace vtto;

namespace {

std::set<int> brute_neighborhood(const StructuredGrid& g, int e, double r)
{
    const double reff = std::max(r, 1.5 * g.h());
    const Point c = g.element_center(e);
    std::set<int> out;
    for (int k = 0; k < g.element_count(); ++k) {
        const Point q = g.element_center(k);
        if (std::hypot(q.x - c.x, q.y - c.y) <= reff * (1.0 + 1e-12)) out.insert(k);
    }
    return out;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("grid construction examples")
{
    const StructuredGrid one(1, 1, 1.0);
    CHECK(one.element_count() == 1);
    CHECK(one.node_count() == 4);
    CHECK(one.element_center(0).x == doctest::Approx(0.5));
    CHECK(one.element_center(0).y == doctest::Approx(0.5));

    const StructuredGrid paper(80, 40, 0.25);
    CHECK(paper.element_count() == 3200);
    CHECK(paper.width() == doctest::Approx(20.0));
    CHECK(paper.height() == doctest::Approx(10.0));

    const StructuredGrid small(3, 2, 0.5);
    CHECK(small.element_count() == 6);
    CHECK(small.node_count() == 12);
    CHECK(small.total_volume() == doctest::Approx(1.5));

    CHECK_THROWS_AS(StructuredGrid(0, 2, 1.0), ConfigError);
    CHECK_THROWS_AS(StructuredGrid(2, 2, -1.0), ConfigError);
}

TEST_CASE("element numbering and nodes")
{
    const StructuredGrid g(3, 2, 0.5);
    const auto nodes = g.element_nodes(g.element_index(1, 1));
    // lower-left, lower-right, upper-right, upper-left
    CHECK(nodes[0] == g.node_index(1, 1));
    CHECK(nodes[1] == g.node_index(2, 1));
    CHECK(nodes[2] == g.node_index(2, 2));
    CHECK(nodes[3] == g.node_index(1, 2));
    CHECK(g.element_at({0.75, 0.25}) == 1);
    CHECK(g.element_at({1.5, 1.0}) == 5);
    CHECK_THROWS_AS(g.element_at({1.6, 0.2}), GeometryError);
    CHECK_THROWS_AS(g.check_element(6), std::out_of_range);
}

TEST_CASE("neighborhood examples")
{
    const StructuredGrid g(5, 5, 1.0);
    const int centre = g.element_index(2, 2);
    CHECK(neighborhood(g, centre, 1.5).size() == 9);
    CHECK(neighborhood(g, centre, 0.0).size() == 9);
    CHECK(effective_radius(g, 0.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(effective_radius(g, -1.0), ParameterError);

    const StructuredGrid two(2, 2, 1.0);
    CHECK(neighborhood(two, 0, 1.5).size() == 4);
}

TEST_CASE("neighborhood equals brute force, is symmetric and monotone in r")
{
    for (const auto& [nx, ny, h] : {std::tuple{10, 10, 1.0}, std::tuple{7, 4, 0.25},
                                    std::tuple{3, 9, 0.5}}) {
        const StructuredGrid g(nx, ny, h);
        for (double r : {0.0, 1.0 * h, 1.5 * h, 2.0 * h, 2.3 * h, 3.7 * h}) {
            const NeighborhoodCache cache(g, r);
            for (int e = 0; e < g.element_count(); ++e) {
                const auto n = as_set(neighborhood(g, e, r));
                REQUIRE(n == brute_neighborhood(g, e, r));
                CHECK(n.count(e) == 1);
                const auto c = cache[e];
                CHECK(as_set({c.begin(), c.end()}) == n);
                for (int k : n) CHECK(as_set(neighborhood(g, k, r)).count(e) == 1);
                const auto bigger = as_set(neighborhood(g, e, r + h));
                CHECK(std::includes(bigger.begin(), bigger.end(), n.begin(), n.end()));
            }
        }
    }
}

TEST_CASE("element field validation and revisions")
{
    const StructuredGrid g(2, 2, 1.0);
    ElementField f(g, Stage::raw, 0.3);
    CHECK(f.size() == 4);
    CHECK(f[3] == 0.3);
    const auto r0 = f.revision();
    f.set(1, 0.7);
    CHECK(f.revision() != r0);
    const auto r1 = f.revision();
    f.assign({0.1, 0.2, 0.3, 0.4});
    CHECK(f.revision() != r1);
    CHECK(f[2] == 0.3);
    CHECK_THROWS_AS(f.set(0, 1.5), ParameterError);
    CHECK_THROWS_AS(ElementField(std::vector<double>{0.1, -0.2}, Stage::raw), ParameterError);
    CHECK(stage_name(Stage::physical) == "physical");

    ElementField g2(g, Stage::raw, 0.3);
    CHECK(g2.revision() != f.revision());
}
