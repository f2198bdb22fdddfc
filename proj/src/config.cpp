#include "vgs/io/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vgs::io {

namespace fs = std::filesystem;

const char* to_string(InitialKind k) {
    switch (k) {
        case InitialKind::uniform: return "uniform";
        case InitialKind::bumps: return "bumps";
        case InitialKind::profile_file: return "profile-file";
        case InitialKind::library_entry: return "library-entry";
    }
    return "?";
}

bool OutputSection::wants(const std::string& fmt) const {
    return std::find(formats.begin(), formats.end(), fmt) != formats.end();
}

Params ScenarioConfig::params() const { return params(model.eps); }

Params ScenarioConfig::params(double eps) const {
    Params p;
    p.du = model.du;
    p.dv = model.dv;
    p.f = model.f;
    p.k = model.k;
    p.eps = eps;
    return p;
}

Grid ScenarioConfig::make_grid() const { return Grid(grid.n_cells, grid.length); }

StepperConfig ScenarioConfig::stepper() const {
    StepperConfig s;
    s.dt = time.dt;
    s.theta = time.theta;
    s.floor = time.floor;
    s.record_every = time.record_every;
    s.snapshot_times = time.snapshot_times;
    s.probe_x = analysis.probe_x;
    return s;
}

LibraryOptions ScenarioConfig::library_options(std::size_t jobs) const {
    LibraryOptions o;
    o.seed_count = library.seed_count;
    o.rng_seed = static_cast<std::uint64_t>(library.rng_seed);
    o.march_time = library.march_time;
    o.max_bumps = library.max_bumps;
    o.newton_tol = library.newton_tol;
    o.probe.trials = library.probe_trials;
    o.probe.horizon = library.probe_horizon;
    o.probe.amplitude = library.probe_amplitude;
    o.jobs = jobs;
    return o;
}

fs::path ScenarioConfig::resolve(const std::string& path) const {
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return p;
    return base_dir / p;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double to_double(const std::string& key, const std::string& s, int line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(begin, &end);
    if (s.empty() || end != begin + s.size() || errno == ERANGE || !std::isfinite(x))
        throw ConfigError(key + ": expected a finite real number, got '" + s + "'", line);
    return x;
}

long long to_integer(const std::string& key, const std::string& s, int line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const long long x = std::strtoll(begin, &end, 10);
    if (s.empty() || end != begin + s.size() || errno == ERANGE)
        throw ConfigError(key + ": expected an integer, got '" + s + "'", line);
    return x;
}

int to_int(const std::string& key, const std::string& s, int line) {
    const long long x = to_integer(key, s, line);
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": integer out of range", line);
    return static_cast<int>(x);
}

std::vector<double> to_doubles(const std::string& key, const std::string& s, int line) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(to_double(key, item, line));
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt_double(xs[i]);
    return s;
}

std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
    return s;
}

struct Key {
    const char* name;
    std::function<void(ScenarioConfig&, const std::string&, int)> set;
    std::function<std::optional<std::string>(const ScenarioConfig&)> get;  ///< nullopt = omit on serialize
};

#define VGS_REAL(NAME, MEMBER)                                                                       \
    Key {                                                                                            \
        NAME, [](ScenarioConfig& c, const std::string& v, int l) { c.MEMBER = to_double(NAME, v, l); }, \
            [](const ScenarioConfig& c) -> std::optional<std::string> { return fmt_double(c.MEMBER); }  \
    }
#define VGS_INT(NAME, MEMBER)                                                                     \
    Key {                                                                                         \
        NAME, [](ScenarioConfig& c, const std::string& v, int l) { c.MEMBER = to_int(NAME, v, l); }, \
            [](const ScenarioConfig& c) -> std::optional<std::string> { return std::to_string(c.MEMBER); } \
    }
#define VGS_REALS(NAME, MEMBER)                                                                       \
    Key {                                                                                             \
        NAME, [](ScenarioConfig& c, const std::string& v, int l) { c.MEMBER = to_doubles(NAME, v, l); }, \
            [](const ScenarioConfig& c) -> std::optional<std::string> { return join(c.MEMBER); }         \
    }
#define VGS_STRING(NAME, MEMBER)                                                                  \
    Key {                                                                                         \
        NAME, [](ScenarioConfig& c, const std::string& v, int) { c.MEMBER = v; },                 \
            [](const ScenarioConfig& c) -> std::optional<std::string> { return c.MEMBER; }        \
    }
#define VGS_STRINGS(NAME, MEMBER)                                                                 \
    Key {                                                                                         \
        NAME, [](ScenarioConfig& c, const std::string& v, int) { c.MEMBER = split_list(v); },     \
            [](const ScenarioConfig& c) -> std::optional<std::string> { return join(c.MEMBER); }  \
    }

const std::vector<Key>& keys() {
    static const std::vector<Key> table{
        VGS_REAL("model.eps", model.eps),
        VGS_REAL("model.f", model.f),
        VGS_REAL("model.k", model.k),
        VGS_REAL("model.du", model.du),
        VGS_REAL("model.dv", model.dv),
        VGS_INT("grid.n_cells", grid.n_cells),
        VGS_REAL("grid.length", grid.length),
        VGS_REAL("time.dt", time.dt),
        VGS_REAL("time.theta", time.theta),
        VGS_REAL("time.horizon", time.horizon),
        VGS_REAL("time.record_every", time.record_every),
        VGS_REAL("time.floor", time.floor),
        VGS_REALS("time.snapshot_times", time.snapshot_times),
        Key{"ic.kind",
            [](ScenarioConfig& c, const std::string& v, int l) {
                if (v == "uniform") c.ic.kind = InitialKind::uniform;
                else if (v == "bumps") c.ic.kind = InitialKind::bumps;
                else if (v == "profile-file") c.ic.kind = InitialKind::profile_file;
                else if (v == "library-entry") c.ic.kind = InitialKind::library_entry;
                else
                    throw ConfigError("ic.kind: expected uniform | bumps | profile-file | library-entry, got '" +
                                          v + "'",
                                      l);
            },
            [](const ScenarioConfig& c) -> std::optional<std::string> { return std::string(to_string(c.ic.kind)); }},
        VGS_REAL("ic.u0", ic.u0),
        VGS_REAL("ic.v0", ic.v0),
        VGS_REAL("ic.p0", ic.p0),
        Key{"ic.y0", [](ScenarioConfig& c, const std::string& v, int l) { c.ic.y0 = to_double("ic.y0", v, l); },
            [](const ScenarioConfig& c) -> std::optional<std::string> {
                if (!c.ic.y0) return std::nullopt;
                return fmt_double(*c.ic.y0);
            }},
        VGS_REALS("ic.centers", ic.centers),
        VGS_REALS("ic.widths", ic.widths),
        VGS_REAL("ic.a", ic.a),
        VGS_REAL("ic.b", ic.b),
        VGS_STRING("ic.file", ic.file),
        VGS_STRING("ic.library", ic.library),
        VGS_INT("ic.entry", ic.entry),
        VGS_REAL("analysis.a_threshold", analysis.a_threshold),
        VGS_REAL("analysis.probe_x", analysis.probe_x),
        VGS_REALS("analysis.sweep_eps", analysis.sweep_eps),
        VGS_REAL("analysis.sweep_horizon_scale", analysis.sweep_horizon_scale),
        VGS_REALS("analysis.limit_eps", analysis.limit_eps),
        VGS_REAL("analysis.limit_horizon", analysis.limit_horizon),
        VGS_STRING("analysis.base", analysis.base),
        VGS_STRINGS("analysis.directions", analysis.directions),
        VGS_REAL("analysis.delta_min", analysis.delta_min),
        VGS_REAL("analysis.delta_max", analysis.delta_max),
        VGS_INT("analysis.n_samples", analysis.n_samples),
        VGS_INT("library.seed_count", library.seed_count),
        Key{"library.rng_seed",
            [](ScenarioConfig& c, const std::string& v, int l) {
                c.library.rng_seed = to_integer("library.rng_seed", v, l);
            },
            [](const ScenarioConfig& c) -> std::optional<std::string> { return std::to_string(c.library.rng_seed); }},
        VGS_REAL("library.march_time", library.march_time),
        VGS_INT("library.max_bumps", library.max_bumps),
        VGS_INT("library.probe_trials", library.probe_trials),
        VGS_REAL("library.probe_horizon", library.probe_horizon),
        VGS_REAL("library.probe_amplitude", library.probe_amplitude),
        VGS_REAL("library.newton_tol", library.newton_tol),
        VGS_STRING("output.directory", output.directory),
        VGS_STRINGS("output.formats", output.formats),
    };
    return table;
}

#undef VGS_REAL
#undef VGS_INT
#undef VGS_REALS
#undef VGS_STRING
#undef VGS_STRINGS

using LineOf = std::function<int(const char*)>;

void check(bool ok, const char* key, const std::string& what, const LineOf& line_of) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what, line_of(key));
}

void validate_impl(const ScenarioConfig& c, bool check_files, const LineOf& line) {
    check(c.model.eps > 0, "model.eps", "must be > 0", line);
    check(c.model.f > 0, "model.f", "must be > 0", line);
    check(c.model.k >= 0, "model.k", "must be >= 0", line);
    check(c.model.du > 0, "model.du", "must be > 0", line);
    check(c.model.dv > 0, "model.dv", "must be > 0", line);
    check(c.grid.n_cells >= 4, "grid.n_cells", "must be >= 4", line);
    check(c.grid.length > 0, "grid.length", "must be > 0", line);
    check(c.time.dt > 0, "time.dt", "must be > 0", line);
    check(c.time.theta >= 0 && c.time.theta <= 1, "time.theta", "must lie in [0, 1]", line);
    check(c.time.horizon > 0, "time.horizon", "must be > 0", line);
    check(c.time.record_every >= c.time.dt, "time.record_every", "must be >= time.dt", line);
    check(c.time.floor >= 0, "time.floor", "must be >= 0", line);
    for (double t : c.time.snapshot_times) check(t >= 0, "time.snapshot_times", "times must be >= 0", line);

    check(c.ic.u0 >= 0, "ic.u0", "must be >= 0", line);
    check(c.ic.v0 >= 0, "ic.v0", "must be >= 0", line);
    check(c.ic.p0 >= 0, "ic.p0", "must be >= 0", line);
    check(!c.ic.y0 || *c.ic.y0 >= 0, "ic.y0", "must be >= 0", line);
    check(c.ic.a >= 0, "ic.a", "must be >= 0", line);
    check(c.ic.b >= 0, "ic.b", "must be >= 0", line);
    if (c.ic.kind == InitialKind::bumps) {
        check(!c.ic.centers.empty(), "ic.centers", "bumps need at least one center", line);
        check(c.ic.widths.size() == 1 || c.ic.widths.size() == c.ic.centers.size(), "ic.widths",
              "give one width or one per center", line);
    }
    for (double w : c.ic.widths) check(w > 0, "ic.widths", "widths must be > 0", line);
    check(c.ic.entry >= 0, "ic.entry", "must be >= 0", line);
    if (c.ic.kind == InitialKind::profile_file) {
        check(!c.ic.file.empty(), "ic.file", "required for ic.kind = profile-file", line);
        if (check_files)
            check(fs::is_regular_file(c.resolve(c.ic.file)), "ic.file",
                  "file not found: " + c.resolve(c.ic.file).string(), line);
    }
    if (c.ic.kind == InitialKind::library_entry) {
        check(!c.ic.library.empty(), "ic.library", "required for ic.kind = library-entry", line);
        if (check_files) {
            const fs::path dir = c.resolve(c.ic.library);
            check(fs::is_regular_file(dir / "index.csv"), "ic.library",
                  "no index.csv in library directory " + dir.string(), line);
            const fs::path prof = dir / ("profile_" + std::to_string(c.ic.entry) + ".csv");
            check(fs::is_regular_file(prof), "ic.entry", "library entry not found: " + prof.string(), line);
        }
    }

    check(c.analysis.a_threshold > 0, "analysis.a_threshold", "must be > 0", line);
    check(c.analysis.probe_x >= 0 && c.analysis.probe_x <= c.grid.length, "analysis.probe_x",
          "must lie in [0, grid.length]", line);
    for (double e : c.analysis.sweep_eps) check(e > 0, "analysis.sweep_eps", "values must be > 0", line);
    check(c.analysis.sweep_horizon_scale >= 0, "analysis.sweep_horizon_scale", "must be >= 0", line);
    for (double e : c.analysis.limit_eps) check(e > 0, "analysis.limit_eps", "values must be > 0", line);
    check(c.analysis.limit_horizon > 0, "analysis.limit_horizon", "must be > 0", line);
    check(c.analysis.base == "boundary" || c.analysis.base == "interior" || c.analysis.base == "both",
          "analysis.base", "expected boundary | interior | both", line);
    for (const auto& d : c.analysis.directions)
        check(d == "s1" || d == "s2" || d == "s3" || d == "mixed", "analysis.directions",
              "unknown direction '" + d + "' (expected s1, s2, s3, mixed)", line);
    check(c.analysis.delta_min < c.analysis.delta_max, "analysis.delta_max", "must exceed analysis.delta_min",
          line);
    check(c.analysis.n_samples >= 3, "analysis.n_samples", "must be >= 3", line);

    check(c.library.seed_count >= 1, "library.seed_count", "must be >= 1", line);
    check(c.library.rng_seed >= 0, "library.rng_seed", "must be >= 0", line);
    check(c.library.march_time > 0, "library.march_time", "must be > 0", line);
    check(c.library.max_bumps >= 0, "library.max_bumps", "must be >= 0", line);
    check(c.library.probe_trials >= 1, "library.probe_trials", "must be >= 1", line);
    check(c.library.probe_horizon > 0, "library.probe_horizon", "must be > 0", line);
    check(c.library.probe_amplitude >= 0, "library.probe_amplitude", "must be >= 0", line);
    check(c.library.newton_tol > 0, "library.newton_tol", "must be > 0", line);

    check(!c.output.directory.empty(), "output.directory", "must not be empty", line);
    for (const auto& f : c.output.formats)
        check(f == "csv" || f == "svg", "output.formats", "unknown format '" + f + "' (expected csv, svg)", line);
}

}  // namespace

void validate(const ScenarioConfig& config, bool check_files) {
    validate_impl(config, check_files, [](const char*) { return 0; });
}

ScenarioConfig parse_config_text(const std::string& text, const fs::path& base_dir, bool check_files) {
    ScenarioConfig c;
    c.source_text = text;
    c.base_dir = base_dir;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'section.key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return key == k.name; });
        if (it == table.end()) throw ConfigError("unknown key '" + key + "'", line_no);
        if (auto prev = seen.find(key); prev != seen.end())
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")",
                              line_no);
        seen[key] = line_no;
        it->set(c, value, line_no);
    }
    if (!seen.count("model.eps")) throw ConfigError("missing required key 'model.eps'");
    validate_impl(c, check_files, [&](const char* key) {
        const auto it = seen.find(key);
        return it == seen.end() ? 0 : it->second;
    });
    return c;
}

ScenarioConfig parse_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

std::string serialize(const ScenarioConfig& config) {
    std::string out;
    std::string section;
    for (const auto& k : keys()) {
        const auto value = k.get(config);
        if (!value) continue;
        const std::string name = k.name;
        const std::string sec = name.substr(0, name.find('.'));
        if (sec != section) {
            if (!section.empty()) out += "\n";
            section = sec;
        }
        out += name + " = " + *value + "\n";
    }
    return out;
}

}  // namespace vgs::io
