#include "rmdyn/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rmdyn/error.hpp"

namespace rmdyn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Ctx {
    std::string key;
    int line;
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(key, line, what); }
};

double parse_real(const std::string& v, const Ctx& c) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) c.fail("expected a finite number, got '" + v + "'");
    return out;
}

std::uint64_t parse_uint(const std::string& v, const Ctx& c) {
    std::uint64_t out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) c.fail("expected a nonnegative integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v, const Ctx& c) {
    if (v == "true") return true;
    if (v == "false") return false;
    c.fail("expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, const Ctx& c) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), c));
    return out;
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt_real(xs[i]);
    return s;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&, const Ctx&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field real_field(std::string sec, std::string key, T RunConfig::*m) {
    return {std::move(sec), std::move(key),
            [m](RunConfig& c, const std::string& v, const Ctx& ctx) { c.*m = parse_real(v, ctx); },
            [m](const RunConfig& c) { return fmt_real(c.*m); }};
}

Field size_field(std::string sec, std::string key, std::size_t RunConfig::*m) {
    return {std::move(sec), std::move(key),
            [m](RunConfig& c, const std::string& v, const Ctx& ctx) {
                c.*m = static_cast<std::size_t>(parse_uint(v, ctx));
            },
            [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Field bool_field(std::string sec, std::string key, bool RunConfig::*m) {
    return {std::move(sec), std::move(key),
            [m](RunConfig& c, const std::string& v, const Ctx& ctx) { c.*m = parse_bool(v, ctx); },
            [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field list_field(std::string sec, std::string key, std::vector<double> RunConfig::*m) {
    return {std::move(sec), std::move(key),
            [m](RunConfig& c, const std::string& v, const Ctx& ctx) { c.*m = parse_list(v, ctx); },
            [m](const RunConfig& c) { return fmt_list(c.*m); }};
}

Field string_field(std::string sec, std::string key, std::string RunConfig::*m) {
    return {std::move(sec), std::move(key),
            [m](RunConfig& c, const std::string& v, const Ctx&) { c.*m = v; },
            [m](const RunConfig& c) { return c.*m; }};
}

constexpr ExperimentKind kKinds[] = {
    ExperimentKind::born,        ExperimentKind::half_prob,    ExperimentKind::brownian,
    ExperimentKind::qct,         ExperimentKind::double_slit,  ExperimentKind::epr,
    ExperimentKind::zeno,        ExperimentKind::product_form, ExperimentKind::geometry_suite,
    ExperimentKind::decomposition_suite,
};

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back({"experiment", "kind",
                     [](RunConfig& c, const std::string& v, const Ctx& ctx) {
                         for (auto k : kKinds)
                             if (v == to_string(k)) {
                                 c.kind = k;
                                 return;
                             }
                         ctx.fail("unknown experiment kind '" + v + "'");
                     },
                     [](const RunConfig& c) { return std::string(to_string(c.kind)); }});
        f.push_back(size_field("experiment", "trials", &RunConfig::trials));
        f.push_back({"experiment", "seed",
                     [](RunConfig& c, const std::string& v, const Ctx& ctx) { c.seed = parse_uint(v, ctx); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});
        f.push_back(size_field("experiment", "threads", &RunConfig::threads));
        f.push_back(real_field("experiment", "mass", &RunConfig::mass));
        f.push_back(list_field("experiment", "centers", &RunConfig::centers));
        f.push_back(list_field("experiment", "weights", &RunConfig::weights));
        f.push_back(real_field("experiment", "packet_a", &RunConfig::packet_a));
        f.push_back(real_field("experiment", "packet_p", &RunConfig::packet_p));
        f.push_back(real_field("experiment", "packet_sigma", &RunConfig::packet_sigma));
        f.push_back(size_field("experiment", "kick_every", &RunConfig::kick_every));
        f.push_back(real_field("experiment", "substep_dt", &RunConfig::substep_dt));
        f.push_back(real_field("experiment", "horizon", &RunConfig::horizon));
        f.push_back(real_field("experiment", "t_obs", &RunConfig::t_obs));
        f.push_back(real_field("experiment", "screen_time", &RunConfig::screen_time));
        f.push_back(real_field("experiment", "propagation_dt", &RunConfig::propagation_dt));
        f.push_back(bool_field("experiment", "measure_at_slits", &RunConfig::measure_at_slits));
        f.push_back(real_field("experiment", "slit_separation", &RunConfig::slit_separation));
        f.push_back(list_field("experiment", "kick_intervals", &RunConfig::kick_intervals));
        f.push_back(list_field("experiment", "device_sigmas", &RunConfig::device_sigmas));
        f.push_back(size_field("experiment", "n_records", &RunConfig::n_records));
        f.push_back(real_field("experiment", "start", &RunConfig::start));

        f.push_back(size_field("grid", "n", &RunConfig::n));
        f.push_back(real_field("grid", "x_min", &RunConfig::x_min));
        f.push_back(real_field("grid", "x_max", &RunConfig::x_max));
        f.push_back(size_field("grid", "n_b", &RunConfig::n_b));
        f.push_back(real_field("grid", "x_min_b", &RunConfig::x_min_b));
        f.push_back(real_field("grid", "x_max_b", &RunConfig::x_max_b));

        f.push_back(real_field("walk", "dt", &RunConfig::dt));
        f.push_back(real_field("walk", "dz", &RunConfig::dz));
        f.push_back(size_field("walk", "max_steps", &RunConfig::max_steps));
        f.push_back(real_field("walk", "hbar", &RunConfig::hbar));
        f.push_back({"walk", "propagator",
                     [](RunConfig& c, const std::string& v, const Ctx& ctx) {
                         if (v == "dense") c.propagator = Propagator::dense;
                         else if (v == "tridiagonal") c.propagator = Propagator::tridiagonal;
                         else ctx.fail("expected dense or tridiagonal, got '" + v + "'");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.propagator == Propagator::dense ? "dense" : "tridiagonal");
                     }});
        f.push_back(bool_field("walk", "calibrate", &RunConfig::calibrate));
        f.push_back({"walk", "calibration_target",
                     [](RunConfig& c, const std::string& v, const Ctx& ctx) {
                         if (v == "rms_shift") c.calibration_target = CalibrationTarget::rms_shift;
                         else if (v == "median_step") c.calibration_target = CalibrationTarget::median_step;
                         else ctx.fail("expected rms_shift or median_step, got '" + v + "'");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.calibration_target == CalibrationTarget::rms_shift
                                                ? "rms_shift"
                                                : "median_step");
                     }});
        f.push_back(size_field("walk", "calibration_trials", &RunConfig::calibration_trials));

        f.push_back({"gue", "scale",
                     [](RunConfig& c, const std::string& v, const Ctx& ctx) { c.scale = parse_real(v, ctx); },
                     [](const RunConfig& c) { return c.scale ? fmt_real(*c.scale) : std::string(); }});

        f.push_back(real_field("detector", "sigma", &RunConfig::sigma));
        f.push_back(real_field("detector", "mu_tol", &RunConfig::mu_tol));
        f.push_back(real_field("detector", "spacing", &RunConfig::spacing));
        f.push_back(real_field("detector", "anchor", &RunConfig::anchor));
        f.push_back(real_field("detector", "sigma_b", &RunConfig::sigma_b));
        f.push_back(real_field("detector", "sigma_b_alt", &RunConfig::sigma_b_alt));

        f.push_back({"potential", "kind",
                     [](RunConfig& c, const std::string& v, const Ctx& ctx) {
                         if (v != "free" && v != "harmonic" && v != "linear")
                             ctx.fail("expected free, harmonic or linear, got '" + v + "'");
                         c.potential = v;
                     },
                     [](const RunConfig& c) { return c.potential; }});
        f.push_back(real_field("potential", "k", &RunConfig::k));
        f.push_back(real_field("potential", "force", &RunConfig::force));
        f.push_back(real_field("potential", "center", &RunConfig::potential_center));
        f.push_back(real_field("potential", "quartic", &RunConfig::quartic));

        f.push_back(string_field("output", "dir", &RunConfig::out_dir));
        f.push_back(bool_field("output", "plots", &RunConfig::plots));
        return f;
    }();
    return fields;
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::born: return "born";
        case ExperimentKind::half_prob: return "half_prob";
        case ExperimentKind::brownian: return "brownian";
        case ExperimentKind::qct: return "qct";
        case ExperimentKind::double_slit: return "double_slit";
        case ExperimentKind::epr: return "epr";
        case ExperimentKind::zeno: return "zeno";
        case ExperimentKind::product_form: return "product_form";
        case ExperimentKind::geometry_suite: return "geometry_suite";
        case ExperimentKind::decomposition_suite: return "decomposition_suite";
    }
    return "unknown";
}

WalkConfig RunConfig::walk() const {
    WalkConfig w;
    w.dt = dt;
    w.dz = dz;
    w.max_steps = max_steps;
    w.hbar = hbar;
    w.propagator = propagator;
    return w;
}

std::size_t RunConfig::effective_threads() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("RMDYN_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, int> seen;  // "section.key" -> line
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("", line_no, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& f : schema()) known = known || f.section == section;
            if (!known) throw ParseError(section, line_no, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("", line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        if (section.empty()) throw ParseError(key, line_no, "key outside of any section");
        const Field* field = nullptr;
        for (const auto& f : schema())
            if (f.section == section && f.key == key) field = &f;
        if (!field) throw ParseError(full, line_no, "unknown key");
        if (seen.count(full)) throw ParseError(full, line_no, "duplicate key");
        seen[full] = line_no;
        // An empty optional value means "unset".
        if (full == "gue.scale" && value.empty()) continue;
        field->set(cfg, value, Ctx{full, line_no});
    }

    auto line_of = [&](const std::string& k) {
        const auto it = seen.find(k);
        return it == seen.end() ? 0 : it->second;
    };
    auto require = [&](bool ok, const std::string& k, const std::string& what) {
        if (!ok) throw ParseError(k, line_of(k), what);
    };
    require(seen.count("experiment.kind") > 0, "experiment.kind", "missing required key");

    auto positive = [&](double v, const std::string& k) { require(v > 0.0, k, "must be positive"); };
    auto pow2 = [](std::size_t v) { return v >= 2 && (v & (v - 1)) == 0; };
    require(cfg.trials >= 1, "experiment.trials", "must be at least 1");
    positive(cfg.mass, "experiment.mass");
    positive(cfg.packet_sigma, "experiment.packet_sigma");
    require(cfg.kick_every >= 1, "experiment.kick_every", "must be at least 1");
    positive(cfg.substep_dt, "experiment.substep_dt");
    positive(cfg.horizon, "experiment.horizon");
    positive(cfg.t_obs, "experiment.t_obs");
    positive(cfg.screen_time, "experiment.screen_time");
    positive(cfg.propagation_dt, "experiment.propagation_dt");
    positive(cfg.slit_separation, "experiment.slit_separation");
    require(cfg.n_records >= 1, "experiment.n_records", "must be at least 1");
    for (double v : cfg.kick_intervals) positive(v, "experiment.kick_intervals");
    for (double v : cfg.device_sigmas) positive(v, "experiment.device_sigmas");
    for (double v : cfg.weights) require(v >= 0.0, "experiment.weights", "must be nonnegative");
    require(pow2(cfg.n), "grid.n", "must be a power of two");
    require(pow2(cfg.n_b), "grid.n_b", "must be a power of two");
    require(cfg.x_max > cfg.x_min, "grid.x_max", "must exceed grid.x_min");
    require(cfg.x_max_b > cfg.x_min_b, "grid.x_max_b", "must exceed grid.x_min_b");
    positive(cfg.dt, "walk.dt");
    positive(cfg.dz, "walk.dz");
    require(cfg.max_steps >= 1, "walk.max_steps", "must be at least 1");
    positive(cfg.hbar, "walk.hbar");
    require(cfg.calibration_trials >= 100, "walk.calibration_trials", "must be at least 100");
    if (cfg.scale) require(*cfg.scale >= 0.0, "gue.scale", "must be nonnegative");
    positive(cfg.sigma, "detector.sigma");

    // Defaults that depend on other keys.
    const double dx = (cfg.x_max - cfg.x_min) / static_cast<double>(cfg.n);
    if (!seen.count("detector.mu_tol")) cfg.mu_tol = dx;
    require(cfg.mu_tol >= 0.0, "detector.mu_tol", "must be nonnegative");
    if (!seen.count("detector.spacing")) cfg.spacing = 6.0 * cfg.sigma;
    positive(cfg.spacing, "detector.spacing");
    if (!seen.count("experiment.centers"))
        cfg.centers = {cfg.start - 0.5 * cfg.spacing, cfg.start + 0.5 * cfg.spacing};
    require(!cfg.centers.empty(), "experiment.centers", "must not be empty");
    if (!seen.count("experiment.weights")) cfg.weights.assign(cfg.centers.size(), 1.0);
    require(cfg.weights.size() == cfg.centers.size(), "experiment.weights",
            "must have one entry per center");
    if (!seen.count("detector.anchor")) cfg.anchor = cfg.centers.front();
    if (!seen.count("detector.sigma_b")) cfg.sigma_b = cfg.sigma;
    positive(cfg.sigma_b, "detector.sigma_b");
    if (!seen.count("detector.sigma_b_alt")) cfg.sigma_b_alt = 0.5 * cfg.sigma_b;
    positive(cfg.sigma_b_alt, "detector.sigma_b_alt");
    if (!seen.count("experiment.kick_intervals")) cfg.kick_intervals = {cfg.dt};
    if (!seen.count("experiment.device_sigmas"))
        cfg.device_sigmas = {cfg.sigma, 0.5 * cfg.sigma, 0.25 * cfg.sigma};
    if (cfg.potential == "harmonic") require(cfg.k > 0.0, "potential.k", "must be positive for a harmonic potential");
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("", 0, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string snapshot(const RunConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : schema()) {
        if (f.section != section) {
            section = f.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        if (f.section == "gue" && f.key == "scale" && !cfg.scale) continue;
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

}  // namespace rmdyn
