#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vtto/config.hpp"
#include "vtto/errors.hpp"

using namespace vtto;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_config_string(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("empty config gives the reference defaults")
{
    const RunConfig c = parse_config_string("");
    const ProblemSetup& s = c.setup;
    CHECK(s.grid.nx() == 80);
    CHECK(s.grid.ny() == 40);
    CHECK(s.grid.h() == 0.25);
    CHECK(s.optimizer.rho_init == 0.3);
    CHECK(s.optimizer.vol_frac_target == 0.3);
    CHECK(s.material.E0 == 1.0);
    CHECK(s.material.nu == 0.3);
    CHECK(s.filter_radius == 0.375);
    CHECK(s.optimizer.tol_drho == 1e-4);
    CHECK(s.optimizer.step_init == 0.05);
    CHECK(s.optimizer.step_decay == 0.98);
    CHECK(s.optimizer.step_min == 1e-4);
    CHECK(s.rho_low == 0.1);
    CHECK(s.schedule.c_p == 1.03);
    CHECK(s.schedule.beta_bar_max == 25.0);
    CHECK(s.schedule.beta_hat_max == 10.0);
    REQUIRE(s.bc.loads.size() == 1);
    CHECK(s.bc.loads[0].node == s.grid.node_index(80, 20));
    CHECK(s.bc.fixed.size() == 82);
}

TEST_CASE("doubling the resolution keeps the domain")
{
    const RunConfig c = parse_config_string("nx = 160\nny = 80\nh = 0.125\n");
    CHECK(c.setup.grid.width() == doctest::Approx(20.0));
    CHECK(c.setup.grid.height() == doctest::Approx(10.0));
    CHECK(c.setup.bc.loads[0].node == c.setup.grid.node_index(160, 40));
}

TEST_CASE("range violations name the key")
{
    CHECK(error_of("vol_frac = 1.5").find("vol_frac") != std::string::npos);
    CHECK(error_of("nu = 0.5").find("nu") != std::string::npos);
    CHECK(error_of("c_p = 1.0").find("c_p") != std::string::npos);
    CHECK(error_of("max_iters = 0").find("max_iters") != std::string::npos);
    CHECK(error_of("rho_low = 0").find("rho_low") != std::string::npos);
    CHECK(error_of("nx = 12.5").find("nx") != std::string::npos);
    CHECK(error_of("dgi = maybe").find("dgi") != std::string::npos);
}

TEST_CASE("parse errors report the line")
{
    CHECK(error_of("# header\nnx = 10\nbogus = 3\n").find("line 3") != std::string::npos);
    CHECK(error_of("nx = 10\nnx = 12\n").find("line 2") != std::string::npos);
    CHECK(error_of("\n\njust words\n").find("line 3") != std::string::npos);
    CHECK(error_of("ny =\n").find("line 1") != std::string::npos);
}

TEST_CASE("comments, booleans, enums and segments")
{
    const RunConfig c = parse_config_string(R"(
# benchmark
nx = 40   # columns
ny = 20
h = 0.5
lt_simp = off
dgi = false
penalized_reference = yes
continuation_mode = simultaneous
volume_measure = raw
linear_solver = iterative
clamp_edge = left
load_x = 20
load_y = 0
load_fy = -2
width_segment = 1 0 1 5 100
width_segment = 2 0 2 5 50
output_dir = results/a
seed = 42
)");
    CHECK_FALSE(c.setup.lt_simp);
    CHECK_FALSE(c.setup.dgi);
    CHECK(c.setup.penalized_reference);
    CHECK(c.setup.schedule.mode == ContinuationMode::simultaneous);
    CHECK(c.setup.volume_measure == VolumeMeasure::raw);
    CHECK(c.setup.solver == LinearSolverKind::iterative);
    CHECK(c.setup.bc.loads[0].node == c.setup.grid.node_index(40, 0));
    CHECK(c.setup.bc.loads[0].magnitude == -2.0);
    REQUIRE(c.width_segments.size() == 2);
    CHECK(c.width_segments[1].samples == 50);
    CHECK(c.output_dir == std::filesystem::path("results/a"));
    CHECK(c.seed == 42);
}

TEST_CASE("inconsistent loads and segments are rejected")
{
    CHECK_FALSE(error_of("load_x = 3").empty());
    CHECK(error_of("width_segment = 0 0 30 1 10").find("width_segment") != std::string::npos);
    CHECK(error_of("width_segment = 0 0 1").find("width_segment") != std::string::npos);
    CHECK_FALSE(error_of("width_lo = 0.9\nwidth_hi = 0.5").empty());
    CHECK_FALSE(error_of("load_fx = 0\nload_fy = 0").empty());
}

TEST_CASE("format_config round-trips")
{
    const RunConfig a = parse_config_string(
        "nx = 30\nny = 10\nh = 0.3\nbeta_hat_max = 25\ndgi = false\nwidth_segment = 1 0 1 3 40\n"
        "load_x = 9\nload_y = 3\nload_fx = 0.5\n");
    const std::string text = format_config(a);
    const RunConfig b = parse_config_string(text);
    CHECK(format_config(b) == text);
    CHECK(b.setup.schedule.beta_hat_max == 25.0);
    CHECK(b.setup.bc.loads.size() == a.setup.bc.loads.size());
}

TEST_CASE("missing files are config errors")
{
    CHECK_THROWS_AS(parse_config("/nonexistent/vtto.cfg"), ConfigError);
    const auto path = std::filesystem::temp_directory_path() / "vtto_config_test.cfg";
    std::ofstream(path) << "nx = 12\nny = 6\n";
    CHECK(parse_config(path).setup.grid.nx() == 12);
    std::filesystem::remove(path);
}
