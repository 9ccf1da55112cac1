#include "vtto/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "vtto/errors.hpp"

namespace vtto {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Draft {
    int nx = 80;
    int ny = 40;
    double h = 0.25;
    RunConfig cfg;
};

[[noreturn]] void bad(const std::string& key, const std::string& why)
{
    throw ConfigError(key + ": " + why);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) bad(key, "expected a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v)
{
    int out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) bad(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    bad(key, "expected true/false, got '" + v + "'");
}

using Handler = std::function<void(Draft&, const std::string& key, const std::string& value)>;

template <typename Get>
Handler number(Get get, double lo, double hi, bool lo_open = false, bool hi_open = false)
{
    return [=](Draft& d, const std::string& key, const std::string& v) {
        const double x = to_double(key, v);
        const bool ok_lo = lo_open ? x > lo : x >= lo;
        const bool ok_hi = hi_open ? x < hi : x <= hi;
        if (!ok_lo || !ok_hi) {
            std::ostringstream os;
            os << "value " << v << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi
               << (hi_open ? ")" : "]");
            bad(key, os.str());
        }
        get(d) = x;
    };
}

template <typename Get>
Handler flag(Get get)
{
    return [=](Draft& d, const std::string& key, const std::string& v) { get(d) = to_bool(key, v); };
}

template <typename Get>
Handler count(Get get, int lo)
{
    return [=](Draft& d, const std::string& key, const std::string& v) {
        const int x = to_int(key, v);
        if (x < lo) bad(key, "must be >= " + std::to_string(lo));
        get(d) = x;
    };
}

constexpr double kInf = 1e300;

const std::map<std::string, Handler>& handlers()
{
    static const std::map<std::string, Handler> table = [] {
        std::map<std::string, Handler> t;
        t["nx"] = count([](Draft& d) -> int& { return d.nx; }, 1);
        t["ny"] = count([](Draft& d) -> int& { return d.ny; }, 1);
        t["h"] = number([](Draft& d) -> double& { return d.h; }, 0.0, kInf, true);
        t["clamp_edge"] = [](Draft& d, const std::string& key, const std::string& v) {
            static const std::map<std::string, Edge> edges{
                {"left", Edge::left}, {"right", Edge::right}, {"bottom", Edge::bottom},
                {"top", Edge::top}};
            const auto it = edges.find(v);
            if (it == edges.end()) bad(key, "expected left/right/bottom/top");
            d.cfg.load.clamp = it->second;
        };
        t["load_x"] = [](Draft& d, const std::string& key, const std::string& v) {
            Point p = d.cfg.load.at.value_or(Point{-1.0, -1.0});
            p.x = to_double(key, v);
            d.cfg.load.at = p;
        };
        t["load_y"] = [](Draft& d, const std::string& key, const std::string& v) {
            Point p = d.cfg.load.at.value_or(Point{-1.0, -1.0});
            p.y = to_double(key, v);
            d.cfg.load.at = p;
        };
        t["load_fx"] = number([](Draft& d) -> double& { return d.cfg.load.fx; }, -kInf, kInf);
        t["load_fy"] = number([](Draft& d) -> double& { return d.cfg.load.fy; }, -kInf, kInf);

        t["E0"] = number([](Draft& d) -> double& { return d.cfg.setup.material.E0; }, 0.0, kInf,
                         true);
        t["nu"] = number([](Draft& d) -> double& { return d.cfg.setup.material.nu; }, 0.0, 0.5,
                         false, true);
        t["rho_min"] = number([](Draft& d) -> double& { return d.cfg.setup.material.rho_min; },
                              0.0, 1e-2, true, true);

        t["filter_radius"] = number([](Draft& d) -> double& { return d.cfg.setup.filter_radius; },
                                    0.0, kInf, true);
        t["filter_radius_is_length_scale"]
            = flag([](Draft& d) -> bool& { return d.cfg.setup.radius_is_length_scale; });
        t["rho_low"] = number([](Draft& d) -> double& { return d.cfg.setup.rho_low; }, 0.0, 1.0,
                              true, true);
        t["lt_simp"] = flag([](Draft& d) -> bool& { return d.cfg.setup.lt_simp; });
        t["lt_projection"] = flag([](Draft& d) -> bool& { return d.cfg.setup.lt_projection; });
        t["dgi"] = flag([](Draft& d) -> bool& { return d.cfg.setup.dgi; });
        t["penalized_reference"]
            = flag([](Draft& d) -> bool& { return d.cfg.setup.penalized_reference; });

        auto sched = [](double ContinuationSchedule::*m) {
            return [m](Draft& d) -> double& { return d.cfg.setup.schedule.*m; };
        };
        t["p_init"] = number(sched(&ContinuationSchedule::p_init), 1.0, kInf);
        t["p_max"] = number(sched(&ContinuationSchedule::p_max), 1.0, kInf);
        t["c_p"] = number(sched(&ContinuationSchedule::c_p), 1.0, kInf, true);
        t["beta_hat_init"] = number(sched(&ContinuationSchedule::beta_hat_init), 0.0, kInf, true);
        t["beta_hat_max"] = number(sched(&ContinuationSchedule::beta_hat_max), 0.0, kInf, true);
        t["c_hat"] = number(sched(&ContinuationSchedule::c_hat), 1.0, kInf, true);
        t["beta_bar_init"] = number(sched(&ContinuationSchedule::beta_bar_init), 1.0, kInf);
        t["beta_bar_max"] = number(sched(&ContinuationSchedule::beta_bar_max), 1.0, kInf);
        t["c_bar"] = number(sched(&ContinuationSchedule::c_bar), 1.0, kInf, true);
        t["continuation_mode"] = [](Draft& d, const std::string& key, const std::string& v) {
            if (v == "sequential") d.cfg.setup.schedule.mode = ContinuationMode::sequential;
            else if (v == "simultaneous") d.cfg.setup.schedule.mode = ContinuationMode::simultaneous;
            else bad(key, "expected sequential/simultaneous");
        };

        auto opt = [](double OptimizerConfig::*m) {
            return [m](Draft& d) -> double& { return d.cfg.setup.optimizer.*m; };
        };
        t["step_init"] = number(opt(&OptimizerConfig::step_init), 0.0, kInf, true);
        t["step_decay"] = number(opt(&OptimizerConfig::step_decay), 0.0, 1.0, true, true);
        t["step_min"] = number(opt(&OptimizerConfig::step_min), 0.0, kInf, true);
        t["vol_frac"] = number(opt(&OptimizerConfig::vol_frac_target), 0.0, 1.0, true);
        t["rho_init"] = number(opt(&OptimizerConfig::rho_init), 0.0, 1.0, true);
        t["tol_drho"] = number(opt(&OptimizerConfig::tol_drho), 0.0, kInf, true);
        t["max_iters"] = count([](Draft& d) -> int& { return d.cfg.setup.optimizer.max_iters; }, 1);
        t["volume_measure"] = [](Draft& d, const std::string& key, const std::string& v) {
            if (v == "physical") d.cfg.setup.volume_measure = VolumeMeasure::physical;
            else if (v == "raw") d.cfg.setup.volume_measure = VolumeMeasure::raw;
            else bad(key, "expected physical/raw");
        };
        t["linear_solver"] = [](Draft& d, const std::string& key, const std::string& v) {
            if (v == "direct") d.cfg.setup.solver = LinearSolverKind::direct;
            else if (v == "iterative") d.cfg.setup.solver = LinearSolverKind::iterative;
            else bad(key, "expected direct/iterative");
        };

        t["output_dir"] = [](Draft& d, const std::string& key, const std::string& v) {
            if (v.empty()) bad(key, "must not be empty");
            d.cfg.output_dir = v;
        };
        t["snapshot_every"] = count([](Draft& d) -> int& { return d.cfg.snapshot_every; }, 0);
        t["seed"] = [](Draft& d, const std::string& key, const std::string& v) {
            std::uint64_t s = 0;
            const char* end = v.data() + v.size();
            auto [ptr, ec] = std::from_chars(v.data(), end, s);
            if (ec != std::errc() || ptr != end) bad(key, "expected an unsigned integer");
            d.cfg.seed = s;
        };
        t["gradcheck_probes"] = count([](Draft& d) -> int& { return d.cfg.gradcheck_probes; }, 1);
        t["gradcheck_step"] = number([](Draft& d) -> double& { return d.cfg.gradcheck_step; },
                                     0.0, 0.05, true, true);
        t["width_segment"] = [](Draft& d, const std::string& key, const std::string& v) {
            std::istringstream is(v);
            WidthSegment s;
            if (!(is >> s.p0.x >> s.p0.y >> s.p1.x >> s.p1.y >> s.samples) || !(is >> std::ws).eof())
                bad(key, "expected 'x0 y0 x1 y1 n'");
            if (s.samples < 2) bad(key, "needs at least two samples");
            d.cfg.width_segments.push_back(s);
        };
        t["width_lo"]
            = number([](Draft& d) -> double& { return d.cfg.width_lo; }, 0.0, 1.0, true, true);
        t["width_hi"]
            = number([](Draft& d) -> double& { return d.cfg.width_hi; }, 0.0, 1.0, true, true);
        t["suite_radius_unit"]
            = number([](Draft& d) -> double& { return d.cfg.suite_radius_unit; }, 0.0, kInf, true);
        return t;
    }();
    return table;
}

RunConfig finish(Draft d)
{
    RunConfig cfg = std::move(d.cfg);
    cfg.setup.grid = StructuredGrid(d.nx, d.ny, d.h);
    if (cfg.load.at && (cfg.load.at->x < 0.0 || cfg.load.at->y < 0.0))
        throw ConfigError("load_x and load_y must be given together");
    if (!(cfg.width_lo < cfg.width_hi)) throw ConfigError("width_lo: must be below width_hi");
    try {
        cfg.rebuild_boundary_conditions();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("load: ") + e.what());
    }
    try {
        cfg.setup.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    for (const auto& s : cfg.width_segments)
        if (!cfg.setup.grid.contains(s.p0) || !cfg.setup.grid.contains(s.p1))
            throw ConfigError("width_segment: segment leaves the domain");
    return cfg;
}

std::string edge_name(Edge e)
{
    switch (e) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
    }
    return "left";
}

} // namespace

void RunConfig::rebuild_boundary_conditions()
{
    const StructuredGrid& g = setup.grid;
    const Point at = load.at.value_or(
        Point{g.origin().x + g.width(), g.origin().y + 0.5 * g.height()});
    setup.bc = clamped_point_load(g, load.clamp, at, load.fx, load.fy);
    setup.bc.validate(g);
}

RunConfig parse_config_string(std::string_view text)
{
    Draft draft;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto it = handlers().find(key);
        if (it == handlers().end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (key != "width_segment" && !seen.insert(key).second)
            throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        it->second(draft, key, value);
    }
    return finish(std::move(draft));
}

RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_string(buf.str());
}

std::string format_config(const RunConfig& cfg)
{
    const ProblemSetup& s = cfg.setup;
    std::ostringstream os;
    os.precision(17);
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "nx = " << s.grid.nx() << "\nny = " << s.grid.ny() << "\nh = " << s.grid.h() << '\n';
    os << "clamp_edge = " << edge_name(cfg.load.clamp) << '\n';
    if (cfg.load.at) os << "load_x = " << cfg.load.at->x << "\nload_y = " << cfg.load.at->y << '\n';
    os << "load_fx = " << cfg.load.fx << "\nload_fy = " << cfg.load.fy << '\n';
    os << "E0 = " << s.material.E0 << "\nnu = " << s.material.nu << "\nrho_min = "
       << s.material.rho_min << '\n';
    os << "filter_radius = " << s.filter_radius << "\nfilter_radius_is_length_scale = "
       << b(s.radius_is_length_scale) << '\n';
    os << "rho_low = " << s.rho_low << "\nlt_simp = " << b(s.lt_simp) << "\nlt_projection = "
       << b(s.lt_projection) << "\ndgi = " << b(s.dgi) << "\npenalized_reference = "
       << b(s.penalized_reference) << '\n';
    const ContinuationSchedule& c = s.schedule;
    os << "p_init = " << c.p_init << "\np_max = " << c.p_max << "\nc_p = " << c.c_p << '\n';
    os << "beta_hat_init = " << c.beta_hat_init << "\nbeta_hat_max = " << c.beta_hat_max
       << "\nc_hat = " << c.c_hat << '\n';
    os << "beta_bar_init = " << c.beta_bar_init << "\nbeta_bar_max = " << c.beta_bar_max
       << "\nc_bar = " << c.c_bar << '\n';
    os << "continuation_mode = "
       << (c.mode == ContinuationMode::sequential ? "sequential" : "simultaneous") << '\n';
    const OptimizerConfig& o = s.optimizer;
    os << "step_init = " << o.step_init << "\nstep_decay = " << o.step_decay
       << "\nstep_min = " << o.step_min << "\nvol_frac = " << o.vol_frac_target
       << "\nrho_init = " << o.rho_init << "\ntol_drho = " << o.tol_drho
       << "\nmax_iters = " << o.max_iters << '\n';
    os << "volume_measure = " << (s.volume_measure == VolumeMeasure::physical ? "physical" : "raw")
       << "\nlinear_solver = " << (s.solver == LinearSolverKind::direct ? "direct" : "iterative")
       << '\n';
    os << "output_dir = " << cfg.output_dir.string() << "\nsnapshot_every = " << cfg.snapshot_every
       << "\nseed = " << cfg.seed << "\ngradcheck_probes = " << cfg.gradcheck_probes
       << "\ngradcheck_step = " << cfg.gradcheck_step << '\n';
    for (const auto& w : cfg.width_segments)
        os << "width_segment = " << w.p0.x << ' ' << w.p0.y << ' ' << w.p1.x << ' ' << w.p1.y
           << ' ' << w.samples << '\n';
    os << "width_lo = " << cfg.width_lo << "\nwidth_hi = " << cfg.width_hi
       << "\nsuite_radius_unit = " << cfg.suite_radius_unit << '\n';
    return os.str();
}

} // namespace vtto
