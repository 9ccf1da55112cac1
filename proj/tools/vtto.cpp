#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vtto/config.hpp"
#include "vtto/diagnostics.hpp"
#include "vtto/errors.hpp"
#include "vtto/export.hpp"
#include "vtto/runner.hpp"

namespace {

using namespace vtto;

int cmd_run(const std::string& path, bool quiet)
{
    const RunConfig cfg = parse_config(path);
    const RunOutcome o = run_single(cfg, quiet ? nullptr : &std::cerr);
    std::printf("status %s\niterations %d\ncompliance %.9g\nvol_frac %.9g\nlt_fraction %.9g\n",
                o.metrics.status.c_str(), o.metrics.iterations, o.metrics.compliance,
                o.metrics.vol_frac, o.metrics.lt_fraction);
    for (std::size_t k = 0; k < o.metrics.transition_widths.size(); ++k)
        std::printf("transition_width_%zu %.9g\n", k, o.metrics.transition_widths[k]);
    if (!o.message.empty()) std::cerr << "vtto: " << o.message << '\n';
    return o.exit_code;
}

int cmd_suite(const std::string& path, const std::string& name)
{
    const RunConfig cfg = parse_config(path);
    const auto rows = run_ablation_suite(cfg, name, &std::cerr);
    std::printf("%-22s %-14s %12s %12s %10s\n", "variant", "status", "compliance", "normalized",
                "lt_frac");
    for (const auto& r : rows)
        std::printf("%-22s %-14s %12.6g %12.6f %10.4g\n", r.variant.c_str(), r.status.c_str(),
                    r.compliance, r.normalized_compliance, r.lt_fraction);
    std::cout << "table written to " << (cfg.output_dir / name / "suite.csv").string() << '\n';
    return kExitSuccess;
}

int cmd_gradcheck(const std::string& path)
{
    const RunConfig cfg = parse_config(path);
    const GradientCheckResult res
        = gradient_check(cfg.setup, cfg.gradcheck_probes, cfg.gradcheck_step, cfg.seed);
    std::printf("%8s %16s %16s %12s\n", "element", "analytic", "numeric", "rel_error");
    for (std::size_t k = 0; k < res.probes.size(); ++k)
        std::printf("%8d %16.9e %16.9e %12.3e\n", res.probes[k], res.analytic[k], res.numeric[k],
                    std::abs(res.analytic[k] - res.numeric[k]) / std::abs(res.numeric[k]));
    std::printf("max_rel_error %.3e\n", res.max_rel_error);
    return kExitSuccess;
}

int cmd_profile(const std::string& path, Point p0, Point p1, int n)
{
    const RunConfig cfg = parse_config(path);
    const auto file = cfg.output_dir / "physical.txt";
    if (!std::filesystem::exists(file)) {
        std::cerr << "vtto: no final fields in " << cfg.output_dir.string() << ", running first\n";
        const int code = run_single(cfg, nullptr).exit_code;
        if (code == kExitNumericalFailure) return code;
    }
    const auto field = read_field_text(file, cfg.setup.grid);
    const LineProfile prof = line_profile(cfg.setup.grid, field, p0, p1, n);
    std::printf("s,x,y,value\n");
    for (std::size_t k = 0; k < prof.values.size(); ++k)
        std::printf("%.9g,%.9g,%.9g,%.9g\n", prof.arc_length[k], prof.points[k].x,
                    prof.points[k].y, prof.values[k]);
    const auto w = transition_width(prof, cfg.width_lo, cfg.width_hi);
    if (w) std::fprintf(stderr, "transition_width %.9g\n", *w);
    else std::fprintf(stderr, "transition_width none\n");
    return kExitSuccess;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable-thickness topology optimization"};
    app.require_subcommand(1);

    std::string config;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "optimize one configuration");
    run->add_option("config", config, "configuration file")->required();
    run->add_flag("-q,--quiet", quiet, "suppress the per-iteration log");

    std::string suite_name;
    auto* suite = app.add_subcommand("suite", "run an ablation suite");
    suite->add_option("config", config, "base configuration file")->required();
    suite->add_option("name", suite_name, "lt_modes, dgi_radius_sharpness or penalization_compare")
        ->required();

    auto* grad = app.add_subcommand("gradcheck", "compare chain-rule and finite-difference gradients");
    grad->add_option("config", config, "configuration file")->required();

    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int n = 0;
    auto* prof = app.add_subcommand("profile", "sample the final physical field along a segment");
    prof->add_option("config", config, "configuration file")->required();
    prof->add_option("x0", x0)->required();
    prof->add_option("y0", y0)->required();
    prof->add_option("x1", x1)->required();
    prof->add_option("y1", y1)->required();
    prof->add_option("n", n, "number of samples")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfigError;
    }

    try {
        if (*run) return cmd_run(config, quiet);
        if (*suite) return cmd_suite(config, suite_name);
        if (*grad) return cmd_gradcheck(config);
        if (*prof) return cmd_profile(config, {x0, y0}, {x1, y1}, n);
    } catch (const ConfigError& e) {
        std::cerr << "vtto: config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const NumericalError& e) {
        std::cerr << "vtto: numerical failure: " << e.what() << '\n';
        return kExitNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "vtto: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitSuccess;
}
