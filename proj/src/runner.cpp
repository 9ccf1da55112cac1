#include "vtto/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "vtto/diagnostics.hpp"
#include "vtto/errors.hpp"

namespace vtto {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_stage_fields(const std::filesystem::path& dir, const std::string& prefix,
                        const StructuredGrid& grid, const ElementField& raw,
                        const ChainState& chain)
{
    const std::pair<const char*, const ElementField*> stages[] = {
        {"raw", &raw}, {"filtered", &chain.filtered}, {"dgi", &chain.dgi},
        {"physical", &chain.physical}};
    for (const auto& [name, field] : stages) {
        write_field_text(dir / (prefix + name + ".txt"), grid, field->values());
        write_field_pgm(dir / (prefix + name + ".pgm"), grid, field->values());
    }
}

void write_config_copy(const RunConfig& cfg)
{
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(cfg.output_dir / "config.txt");
    out << format_config(cfg);
}

std::string g17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::vector<double> segment_widths(const RunConfig& cfg, std::span<const double> physical)
{
    std::vector<double> widths;
    for (const auto& s : cfg.width_segments) {
        const LineProfile prof = line_profile(cfg.setup.grid, physical, s.p0, s.p1, s.samples);
        widths.push_back(transition_width(prof, cfg.width_lo, cfg.width_hi).value_or(kNaN));
    }
    return widths;
}

RunOutcome run_single(const RunConfig& cfg, std::ostream* log)
{
    RunOutcome out;
    const StructuredGrid& grid = cfg.setup.grid;
    const std::filesystem::path dir = cfg.output_dir;
    write_config_copy(cfg);
    const std::filesystem::path snapshots = dir / "snapshots";

    IterationObserver observer = [&](const IterationRecord& rec, const ElementField& raw,
                                     const ChainState& chain) {
        if (log)
            *log << "it " << rec.iter << "  c " << g17(rec.compliance) << "  v " << rec.vol_frac
                 << "  drho " << rec.drho_mean << "  p " << rec.p << "  bh " << rec.beta_hat
                 << "  bb " << rec.beta_bar << '\n';
        if (cfg.snapshot_every > 0 && rec.iter % cfg.snapshot_every == 0) {
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "iter_%05d_", rec.iter);
            write_stage_fields(snapshots, prefix, grid, raw, chain);
        }
    };

    try {
        OptimizationResult res = run_optimization(cfg.setup, observer);
        write_history_csv(dir / "history.csv", res.history);
        write_stage_fields(dir, "", grid, res.raw, res.chain);
        write_thickness_vtk(dir / "thickness.vtk", grid, res.chain.physical.values());

        out.metrics.status = res.converged ? "converged" : "not_converged";
        out.metrics.iterations = static_cast<int>(res.history.size());
        out.metrics.converged = res.converged;
        out.metrics.compliance = res.compliance;
        out.metrics.vol_frac = res.vol_frac;
        out.metrics.lt_fraction = res.lt_fraction;
        out.metrics.continuation = res.continuation;
        out.metrics.transition_widths = segment_widths(cfg, res.chain.physical.values());
        out.exit_code = res.converged ? kExitSuccess : kExitNotConverged;
        if (!res.converged)
            out.message = "no convergence within " + std::to_string(cfg.setup.optimizer.max_iters)
                          + " iterations";
        out.result = std::move(res);
    } catch (const OptimizationFailure& e) {
        write_history_csv(dir / "history.csv", e.history);
        write_field_text(dir / "raw_at_failure.txt", grid, e.last_design);
        out.metrics.status = "failed";
        out.metrics.iterations = static_cast<int>(e.history.size());
        out.exit_code = kExitNumericalFailure;
        out.message = e.what();
    } catch (const NumericalError& e) {
        out.metrics.status = "failed";
        out.exit_code = kExitNumericalFailure;
        out.message = e.what();
    }
    write_metrics(dir / "metrics.txt", out.metrics);
    return out;
}

std::vector<std::string> suite_names()
{
    return {"lt_modes", "dgi_radius_sharpness", "penalization_compare"};
}

std::vector<SuiteMember> suite_members(const RunConfig& base, const std::string& suite)
{
    const std::filesystem::path root = base.output_dir / suite;
    std::vector<SuiteMember> members;
    auto add = [&](std::string variant, std::string group, bool reference, auto&& tweak) {
        SuiteMember m{variant, std::move(group), reference, base};
        m.config.output_dir = root / variant;
        m.config.setup.penalized_reference = false;
        tweak(m.config.setup);
        members.push_back(std::move(m));
    };

    if (suite == "lt_modes") {
        struct Mode {
            const char* name;
            bool simp;
            bool proj;
        };
        for (const Mode& m : {Mode{"none", false, false}, Mode{"simp_only", true, false},
                              Mode{"projection_only", false, true}, Mode{"combined", true, true}})
            add(m.name, "all", m.simp == false && m.proj == false, [&](ProblemSetup& s) {
                s.lt_simp = m.simp;
                s.lt_projection = m.proj;
                s.dgi = false;
            });
    } else if (suite == "dgi_radius_sharpness") {
        const double multiples[] = {1.0, 1.5, 2.0};
        const double sharpness[] = {0.0, 5.0, 10.0, 25.0};
        for (double k : multiples) {
            const double r = k * base.suite_radius_unit;
            char group[32];
            std::snprintf(group, sizeof group, "r%g", k);
            for (double b : sharpness) {
                char name[64];
                if (b == 0.0) std::snprintf(name, sizeof name, "r%g_off", k);
                else std::snprintf(name, sizeof name, "r%g_b%g", k, b);
                add(name, group, b == 0.0, [&](ProblemSetup& s) {
                    s.filter_radius = r;
                    s.radius_is_length_scale = false;
                    s.lt_simp = true;
                    s.lt_projection = true;
                    s.dgi = b > 0.0;
                    if (b > 0.0) s.schedule.beta_hat_max = b;
                });
            }
        }
    } else if (suite == "penalization_compare") {
        add("vtto", "all", true, [](ProblemSetup& s) {
            s.lt_simp = false;
            s.lt_projection = false;
            s.dgi = false;
        });
        add("penalized", "all", false, [](ProblemSetup& s) { s.penalized_reference = true; });
    } else {
        throw ConfigError("unknown suite '" + suite
                          + "' (expected lt_modes, dgi_radius_sharpness or penalization_compare)");
    }
    return members;
}

std::vector<SuiteRow> run_ablation_suite(const RunConfig& base, const std::string& suite,
                                         std::ostream* log)
{
    const std::vector<SuiteMember> members = suite_members(base, suite);
    std::vector<SuiteRow> rows;
    for (const SuiteMember& m : members) {
        if (log) *log << "[" << suite << "] " << m.variant << '\n';
        const ProblemSetup& s = m.config.setup;
        SuiteRow row;
        row.variant = m.variant;
        row.filter_radius = s.filter_radius;
        row.lt_simp = s.lt_simp && !s.penalized_reference;
        row.lt_projection = s.lt_projection && !s.penalized_reference;
        row.dgi = s.dgi && !s.penalized_reference;
        row.beta_hat_max = row.dgi ? s.schedule.beta_hat_max : 0.0;
        row.penalized = s.penalized_reference;
        RunOutcome o;
        try {
            o = run_single(m.config, nullptr);
        } catch (const std::exception& e) {
            o.exit_code = kExitNumericalFailure;
            o.metrics.status = "failed";
            o.message = e.what();
        }
        row.status = o.metrics.status;
        row.iterations = o.metrics.iterations;
        const bool usable = o.result.has_value();
        row.compliance = usable ? o.metrics.compliance : kNaN;
        row.vol_frac = usable ? o.metrics.vol_frac : kNaN;
        row.lt_fraction = usable ? o.metrics.lt_fraction : kNaN;
        row.transition_widths = usable ? o.metrics.transition_widths
                                       : std::vector<double>(base.width_segments.size(), kNaN);
        if (log) {
            *log << "  " << row.status << " after " << row.iterations << " iterations, c = "
                 << g17(row.compliance);
            if (!o.message.empty()) *log << " (" << o.message << ")";
            *log << '\n';
        }
        rows.push_back(std::move(row));
    }

    for (std::size_t k = 0; k < rows.size(); ++k) {
        double ref = kNaN;
        for (std::size_t j = 0; j < members.size(); ++j)
            if (members[j].reference && members[j].group == members[k].group)
                ref = rows[j].compliance;
        rows[k].normalized_compliance = rows[k].compliance / ref;
    }
    write_suite_csv(base.output_dir / suite / "suite.csv", rows);
    return rows;
}

void write_suite_csv(const std::filesystem::path& path, std::span<const SuiteRow> rows)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const std::size_t widths = rows.empty() ? 0 : rows.front().transition_widths.size();
    out << "variant,filter_radius,beta_hat_max,lt_simp,lt_projection,dgi,penalized,status,"
           "iterations,compliance,normalized_compliance,vol_frac,lt_fraction";
    for (std::size_t k = 0; k < widths; ++k) out << ",transition_width_" << k;
    out << '\n';
    for (const SuiteRow& r : rows) {
        out << r.variant << ',' << g17(r.filter_radius) << ',' << g17(r.beta_hat_max) << ','
            << r.lt_simp << ',' << r.lt_projection << ',' << r.dgi << ',' << r.penalized << ','
            << r.status << ',' << r.iterations << ',' << g17(r.compliance) << ','
            << g17(r.normalized_compliance) << ',' << g17(r.vol_frac) << ','
            << g17(r.lt_fraction);
        for (double w : r.transition_widths) out << ',' << g17(w);
        out << '\n';
    }
}

} // namespace vtto
