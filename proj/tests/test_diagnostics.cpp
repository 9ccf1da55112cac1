#include <doctest.h>

#include <cmath>

#include "vtto/diagnostics.hpp"
#include "vtto/errors.hpp"
#include "vtto/optimizer.hpp"
#include "vtto/projections.hpp"

using namespace vtto;

TEST_CASE("low-thickness fraction examples")
{
    const std::vector<double> v4(4, 1.0);
    CHECK(low_thickness_fraction(std::vector<double>(4, 1.0), v4, 0.1) == 0.0);
    CHECK(low_thickness_fraction(std::vector<double>(4, 0.05), v4, 0.1) == 1.0);
    CHECK(low_thickness_fraction(std::vector<double>{0.0005, 0.05, 0.5, 1.0}, v4, 0.1)
          == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(low_thickness_fraction(std::vector<double>(4, 0.0), v4, 0.1) == 0.0);
    CHECK(low_thickness_fraction(std::vector<double>{0.001, 0.1, 0.3, 0.0}, v4, 0.1) == 0.0);
    const std::vector<double> w{1.0, 3.0};
    CHECK(low_thickness_fraction(std::vector<double>{0.05, 0.5}, w, 0.1) == doctest::Approx(0.25));
    CHECK_THROWS_AS(low_thickness_fraction(std::vector<double>{0.1}, v4, 0.1), ParameterError);
}

TEST_CASE("line profile sampling")
{
    const StructuredGrid g(4, 4, 1.0);
    const LineProfile flat
        = line_profile(g, std::vector<double>(16, 0.42), {0.1, 0.1}, {3.9, 3.7}, 9);
    for (double v : flat.values) CHECK(v == 0.42);
    CHECK(flat.arc_length.back() == doctest::Approx(std::hypot(3.8, 3.6)));

    std::vector<double> split(16, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 2; j < 4; ++j) split[g.element_index(i, j)] = 1.0;
    const LineProfile step = line_profile(g, split, {1.5, 0.25}, {1.5, 3.75}, 8);
    const std::vector<double> expect_step{0, 0, 0, 0, 1, 1, 1, 1};
    CHECK(step.values == expect_step);

    std::vector<double> checker(16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) checker[g.element_index(i, j)] = (i + j) % 2 == 0 ? 1.0 : 0.0;
    const LineProfile diag = line_profile(g, checker, {0.5, 0.5}, {3.5, 2.0}, 7);
    const std::vector<double> expect_diag{1, 0, 1, 0, 0, 1, 0};
    CHECK(diag.values == expect_diag);

    CHECK_THROWS_AS(line_profile(g, checker, {0.5, 0.5}, {4.5, 2.0}, 7), GeometryError);
    CHECK_THROWS_AS(line_profile(g, checker, {0.5, 0.5}, {3.5, 2.0}, 1), ParameterError);
}

TEST_CASE("transition width examples")
{
    auto profile = [](std::vector<double> values, double spacing) {
        LineProfile p;
        for (std::size_t k = 0; k < values.size(); ++k) {
            p.arc_length.push_back(spacing * k);
            p.points.push_back({spacing * k, 0.0});
        }
        p.values = std::move(values);
        return p;
    };

    std::vector<double> step(20, 0.0);
    std::fill(step.begin() + 10, step.end(), 0.8);
    const auto w_step = transition_width(profile(step, 0.1));
    REQUIRE(w_step.has_value());
    CHECK(*w_step <= 0.1 + 1e-12);

    // ramp of length L = 2 from 0 to 0.6 sampled every 0.01, padded with plateaus
    std::vector<double> ramp;
    for (int k = 0; k < 50; ++k) ramp.push_back(0.0);
    for (int k = 0; k <= 200; ++k) ramp.push_back(0.6 * k / 200.0);
    for (int k = 0; k < 50; ++k) ramp.push_back(0.6);
    const auto w_ramp = transition_width(profile(ramp, 0.01));
    REQUIRE(w_ramp.has_value());
    CHECK(*w_ramp == doctest::Approx(0.9 * 2.0).epsilon(1e-9));

    CHECK_FALSE(transition_width(profile(std::vector<double>(10, 0.5), 0.1)).has_value());
    CHECK_FALSE(transition_width(profile(std::vector<double>(10, 0.0), 0.1)).has_value());
}

TEST_CASE("transition width shrinks with DGI sharpness on a blurred step")
{
    const StructuredGrid g(80, 5, 0.125);
    std::vector<double> raw(g.element_count(), 0.0);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 40; i < g.nx(); ++i) raw[g.element_index(i, j)] = 0.9;
    const RegularizationChain chain(g, 0.375);
    const ElementField field(raw, Stage::raw);

    auto width = [&](bool dgi, double beta_hat) {
        ProjectionParams p;
        p.lt_enabled = false;
        p.dgi_enabled = dgi;
        p.beta_hat = beta_hat;
        const ChainState s = chain.forward(field, p);
        const LineProfile prof = line_profile(g, s.physical.values(), {0.01, 0.3}, {9.99, 0.3}, 400);
        return transition_width(prof).value();
    };
    const double off = width(false, 0.0);
    const double w5 = width(true, 5.0);
    const double w10 = width(true, 10.0);
    const double w25 = width(true, 25.0);
    const double w100 = width(true, 100.0);
    CHECK(off > 0.0);
    CHECK(w5 <= off);
    CHECK(w10 <= w5);
    CHECK(w25 <= w10);
    CHECK(w100 <= w25);
    CHECK(w25 < off);
}

TEST_CASE("gradient check on small grids")
{
    ProblemSetup s;
    s.grid = StructuredGrid(8, 4, 1.0);
    s.bc = cantilever(s.grid);
    s.filter_radius = 1.5;

    SUBCASE("smooth chain")
    {
        s.lt_simp = false;
        s.lt_projection = false;
        s.dgi = false;
        const auto res = gradient_check(s, 16, 1e-6, 3);
        CHECK(res.probes.size() == 16);
        CHECK(res.max_rel_error < 1e-6);
    }
    SUBCASE("full chain with frozen statistics")
    {
        const ContinuationState st = final_continuation_state(s.effective_schedule());
        CHECK(st.p == 3.0);
        CHECK(st.beta_hat == 10.0);
        CHECK(st.beta_bar == 25.0);
        const auto res = gradient_check(s, 16, 1e-6, 3);
        CHECK(res.max_rel_error < 1e-4);
    }
    SUBCASE("central differences are second order")
    {
        s.dgi = false;
        const double e1 = gradient_check(s, 8, 1e-3, 5).max_rel_error;
        const double e2 = gradient_check(s, 8, 5e-4, 5).max_rel_error;
        CHECK(e1 >= 3.0 * e2);
    }
}
