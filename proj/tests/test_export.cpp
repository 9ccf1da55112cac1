#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "vtto/config.hpp"
#include "vtto/export.hpp"
#include "vtto/runner.hpp"

using namespace vtto;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("vtto_test_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig tiny_config(const fs::path& out, const std::string& extra = "")
{
    RunConfig c = parse_config_string("nx = 24\nny = 12\nh = 0.8333333333333334\n"
                                      "filter_radius = 1.25\n"
                                      + extra);
    c.output_dir = out;
    return c;
}

} // namespace

TEST_CASE("text snapshots round-trip to nine digits")
{
    const StructuredGrid g(7, 3, 1.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> f(g.element_count());
    for (double& v : f) v = d(rng);
    f[0] = 0.0;
    f[1] = 1.0;
    f[2] = 1e-9;
    const fs::path p = scratch("roundtrip.txt");
    write_field_text(p, g, f);
    const auto back = read_field_text(p, g);
    for (std::size_t e = 0; e < f.size(); ++e) {
        CHECK(std::abs(back[e] - f[e]) <= 5e-9 * std::max(std::abs(f[e]), 1e-300));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", f[e]);
        CHECK(back[e] == std::stod(buf));
    }
    // top row first
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    std::istringstream row(first);
    double v0 = -1.0;
    row >> v0;
    CHECK(v0 == doctest::Approx(f[g.element_index(0, 2)]).epsilon(1e-8));
    CHECK_THROWS(read_field_text(p, StructuredGrid(7, 4, 1.0)));
    fs::remove(p);
}

TEST_CASE("graymap export")
{
    const StructuredGrid g(5, 2, 1.0);
    const fs::path p = scratch("solid.pgm");
    write_field_pgm(p, g, std::vector<double>(10, 1.0));
    const std::string bytes = slurp(p);
    const std::string header = "P5\n5 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 10);
    CHECK(bytes.substr(0, header.size()) == header);
    for (std::size_t k = header.size(); k < bytes.size(); ++k)
        CHECK(static_cast<unsigned char>(bytes[k]) == 255);

    std::vector<double> f(10, 0.0);
    f[g.element_index(0, 1)] = 0.5;        // top-left pixel, rounds half up
    f[g.element_index(4, 0)] = 0.25 / 255; // bottom-right pixel
    write_field_pgm(p, g, f);
    const std::string b2 = slurp(p);
    CHECK(static_cast<unsigned char>(b2[header.size()]) == 128);
    CHECK(static_cast<unsigned char>(b2.back()) == 0);
    fs::remove(p);
}

TEST_CASE("vtk export")
{
    const StructuredGrid g(3, 2, 0.5);
    const fs::path p = scratch("t.vtk");
    write_thickness_vtk(p, g, std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    const std::string s = slurp(p);
    CHECK(s.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    CHECK(s.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(s.find("DIMENSIONS 4 3 1") != std::string::npos);
    CHECK(s.find("SPACING 0.5 0.5 1") != std::string::npos);
    CHECK(s.find("CELL_DATA 6") != std::string::npos);
    CHECK(s.find("SCALARS thickness double 1") != std::string::npos);
    CHECK(s.find("0.6\n") != std::string::npos);
    fs::remove(p);
}

TEST_CASE("history csv")
{
    const fs::path p = scratch("h.csv");
    IterationRecord r;
    r.iter = 3;
    r.compliance = 12.5;
    write_history_csv(p, std::vector<IterationRecord>{r});
    std::ifstream in(p);
    std::string header;
    std::string row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "iter,compliance,vol_frac,drho_mean,p,beta_hat,beta_bar,step,lt_fraction");
    CHECK(row.rfind("3,12.5,", 0) == 0);
    fs::remove(p);
}

TEST_CASE("single run writes every artifact")
{
    const fs::path out = scratch("run");
    const RunConfig cfg = tiny_config(out, "width_segment = 1 0 1 10 50\nsnapshot_every = 25\n");
    const RunOutcome o = run_single(cfg);
    CHECK(o.exit_code == kExitSuccess);
    REQUIRE(o.result.has_value());
    for (const char* f : {"config.txt", "history.csv", "metrics.txt", "thickness.vtk", "raw.txt",
                          "filtered.txt", "dgi.txt", "physical.txt", "raw.pgm", "physical.pgm"})
        CHECK(fs::exists(out / f));
    CHECK(fs::exists(out / "snapshots" / "iter_00000_physical.txt"));
    CHECK(fs::exists(out / "snapshots" / "iter_00025_dgi.pgm"));
    CHECK(o.metrics.transition_widths.size() == 1);
    const std::string metrics = slurp(out / "metrics.txt");
    CHECK(metrics.find("status = converged") != std::string::npos);
    CHECK(metrics.find("transition_width_0 = ") != std::string::npos);
    CHECK(o.result->history.back().drho_mean < 1e-4);
    CHECK(parse_config(out / "config.txt").setup.grid.nx() == 24);

    // identical configuration: byte-identical history
    const RunConfig again = tiny_config(scratch("run_again"), "width_segment = 1 0 1 10 50\n");
    run_single(again);
    CHECK(slurp(out / "history.csv") == slurp(again.output_dir / "history.csv"));
    fs::remove_all(out);
    fs::remove_all(again.output_dir);
}

TEST_CASE("identity maps reproduce the filtered snapshot")
{
    const fs::path out = scratch("identity");
    const RunConfig cfg = tiny_config(out, "lt_projection = false\ndgi = false\n");
    run_single(cfg);
    const std::string filtered = slurp(out / "filtered.txt");
    CHECK(slurp(out / "dgi.txt") == filtered);
    CHECK(slurp(out / "physical.txt") == filtered);
    fs::remove_all(out);
}

TEST_CASE("non-convergence keeps partial artifacts")
{
    const fs::path out = scratch("short");
    const RunConfig cfg = tiny_config(out, "max_iters = 5\n");
    const RunOutcome o = run_single(cfg);
    CHECK(o.exit_code == kExitNotConverged);
    CHECK(o.metrics.status == "not_converged");
    CHECK(fs::exists(out / "history.csv"));
    CHECK(fs::exists(out / "physical.txt"));
    fs::remove_all(out);
}

TEST_CASE("suite matrices")
{
    const RunConfig base = tiny_config("suite_base");
    const auto dgi = suite_members(base, "dgi_radius_sharpness");
    REQUIRE(dgi.size() == 12);
    CHECK(dgi[0].variant == "r1_off");
    CHECK(dgi[0].reference);
    CHECK(dgi[0].config.setup.filter_radius == 0.25);
    CHECK(dgi[5].config.setup.filter_radius == 0.375);
    CHECK(dgi[6].config.setup.schedule.beta_hat_max == 10.0);
    CHECK(dgi[11].config.setup.filter_radius == 0.5);
    CHECK(dgi[11].config.setup.schedule.beta_hat_max == 25.0);
    CHECK(dgi[3].config.output_dir == fs::path("suite_base") / "dgi_radius_sharpness" / "r1_b25");
    for (const auto& m : dgi) {
        CHECK(m.config.setup.lt_simp);
        CHECK(m.config.setup.lt_projection);
        CHECK(m.config.setup.dgi == !m.reference);
    }

    const auto lt = suite_members(base, "lt_modes");
    REQUIRE(lt.size() == 4);
    CHECK(lt[0].variant == "none");
    CHECK(lt[3].variant == "combined");
    CHECK(lt[3].config.setup.lt_simp);
    CHECK(lt[3].config.setup.lt_projection);

    const auto pc = suite_members(base, "penalization_compare");
    REQUIRE(pc.size() == 2);
    CHECK_FALSE(pc[0].config.setup.penalized_reference);
    CHECK(pc[1].config.setup.penalized_reference);

    CHECK_THROWS_AS(suite_members(base, "nope"), ConfigError);
}

TEST_CASE("penalization suite writes a normalized table")
{
    const fs::path out = scratch("suite");
    const RunConfig base = tiny_config(out);
    const auto rows = run_ablation_suite(base, "penalization_compare");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].normalized_compliance == 1.0);
    CHECK(rows[1].normalized_compliance == doctest::Approx(rows[1].compliance / rows[0].compliance));
    CHECK(rows[1].normalized_compliance > 1.0);
    const std::string csv = slurp(out / "penalization_compare" / "suite.csv");
    CHECK(csv.rfind("variant,filter_radius,beta_hat_max,lt_simp,lt_projection,dgi,penalized,status,"
                    "iterations,compliance,normalized_compliance,vol_frac,lt_fraction\n",
                    0)
          == 0);
    CHECK(fs::exists(out / "penalization_compare" / "vtto" / "history.csv"));
    CHECK(fs::exists(out / "penalization_compare" / "penalized" / "history.csv"));
    fs::remove_all(out);
}
