#include "gltransit/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace gltransit {

namespace {

constexpr std::array<std::string_view, 5> kSections{"problem", "model", "solver", "sweep", "probe"};

constexpr std::array<std::string_view, 27> kKeys{
    "scheme",     "seed",      "delta",       "K",          "T",           "M",        "N",
    "epsilon",    "cutoff_s",  "nu",          "picard_tol", "picard_max",  "newton_tol", "newton_max",
    "warm_start", "descent_tol", "descent_max", "descent_K", "K_step",     "ladder",   "mode",
    "resolutions", "fixed",    "schemes",     "fit_points", "directions",  "scales"};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

// Strips an optional known section prefix from `section.key`.
std::string_view bare_key(std::string_view key) {
    const auto dot = key.find('.');
    if (dot != std::string_view::npos && is_known_section(key.substr(0, dot))) return key.substr(dot + 1);
    return key;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError("key '" + std::string(key) + "': '" + std::string(v) + "' is not a number");
    }
    return out;
}

int to_int(std::string_view key, std::string_view v) {
    int out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError("key '" + std::string(key) + "': '" + std::string(v) + "' is not an integer");
    }
    return out;
}

// Runs `f` and rethrows argument errors as ConfigError tagged with the key.
template <class F>
auto keyed(std::string_view key, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("key '" + std::string(key) + "': " + e.what());
    }
}

}  // namespace

bool is_known_key(std::string_view key) {
    return std::find(kKeys.begin(), kKeys.end(), bare_key(key)) != kKeys.end();
}

bool is_known_section(std::string_view section) {
    return std::find(kSections.begin(), kSections.end(), section) != kSections.end();
}

Config Config::parse(std::string_view text) {
    Config c;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (!is_known_section(name)) throw ConfigError(where + "unknown section '" + std::string(name) + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (!is_known_key(key)) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (c.values_.count(bare_key(key))) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        c.values_.emplace(std::string(bare_key(key)), std::string(trim(line.substr(eq + 1))));
    }
    return c;
}

Config Config::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(std::string_view key, std::string_view value) {
    if (!is_known_key(key)) throw ConfigError("unknown key '" + std::string(key) + "'");
    values_[std::string(bare_key(key))] = std::string(value);
}

std::optional<std::string> Config::get(std::string_view key) const {
    const auto it = values_.find(bare_key(key));
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

RunSettings settings_from(const Config& cfg) {
    RunSettings s;
    auto num = [&](std::string_view key, double& out) {
        if (auto v = cfg.get(key)) out = to_double(key, *v);
    };
    auto integer = [&](std::string_view key, int& out) {
        if (auto v = cfg.get(key)) out = to_int(key, *v);
    };

    if (auto v = cfg.get("scheme")) s.scheme = keyed("scheme", [&] { return parse_scheme(*v); });
    if (auto v = cfg.get("seed")) s.seed = keyed("seed", [&] { return parse_seed(*v); });
    num("delta", s.params.delta);
    num("K", s.params.K);
    num("T", s.params.T);
    integer("M", s.M);
    integer("N", s.N);
    if (auto v = cfg.get("epsilon"); v && *v != "none") s.params.epsilon = to_double("epsilon", *v);
    if (auto v = cfg.get("cutoff_s"); v && *v != "none") s.params.cutoff_s = to_double("cutoff_s", *v);
    keyed("delta, K, T, epsilon or cutoff_s", [&] {
        s.params.validate();
        return 0;
    });
    if (s.M < 2) throw ConfigError("key 'M': must be at least 2");
    if (s.N < 1) throw ConfigError("key 'N': must be at least 1");

    auto& sc = s.solver;
    num("nu", sc.nu);
    num("picard_tol", sc.picard_tol);
    integer("picard_max", sc.picard_max);
    num("newton_tol", sc.newton_tol);
    integer("newton_max", sc.newton_max);
    if (auto v = cfg.get("warm_start")) sc.warm_start = keyed("warm_start", [&] { return parse_warm_start(*v); });
    num("descent_tol", sc.descent_tol);
    integer("descent_max", sc.descent_max);
    num("descent_K", sc.descent_K);
    num("K_step", sc.K_step);

    const Stage target{s.grid(), s.params};
    if (auto v = cfg.get("ladder"); v && !trim(*v).empty()) {
        for (auto item : split(*v, ';')) {
            if (item.empty()) continue;
            const auto f = split(item, ',');
            if (f.size() != 4) throw ConfigError("key 'ladder': each stage needs M,N,delta,K");
            const int m = to_int("ladder", f[0]);
            const int n = to_int("ladder", f[1]);
            if (m < 2 || n < 1) throw ConfigError("key 'ladder': stage grid needs M >= 2 and N >= 1");
            Stage st{SpaceTimeGrid(m, n, s.params.T), s.params};
            st.params.delta = to_double("ladder", f[2]);
            st.params.K = to_double("ladder", f[3]);
            sc.ladder.push_back(st);
        }
    }
    const bool ends_at_target = !sc.ladder.empty() && sc.ladder.back().grid == target.grid &&
                                sc.ladder.back().params.delta == target.params.delta &&
                                sc.ladder.back().params.K == target.params.K;
    if (!ends_at_target) sc.ladder.push_back(target);
    keyed("solver settings", [&] {
        sc.validate();
        return 0;
    });

    auto& sw = s.sweep;
    sw.base = sc;
    sw.seed = s.seed;
    sw.schemes = {s.scheme};
    if (auto v = cfg.get("mode")) sw.mode = keyed("mode", [&] { return parse_sweep_mode(*v); });
    if (auto v = cfg.get("resolutions")) {
        sw.resolutions.clear();
        for (auto r : split(*v, ',')) sw.resolutions.push_back(to_int("resolutions", r));
    }
    sw.fixed = sw.mode == SweepMode::Dx ? s.N : s.M;
    integer("fixed", sw.fixed);
    if (auto v = cfg.get("schemes")) {
        sw.schemes.clear();
        for (auto r : split(*v, ',')) sw.schemes.push_back(keyed("schemes", [&] { return parse_scheme(r); }));
    }
    if (auto v = cfg.get("fit_points")) {
        const int n = to_int("fit_points", *v);
        if (n < 0) throw ConfigError("key 'fit_points': must be nonnegative");
        sw.fit_points = static_cast<std::size_t>(n);
    }
    if (cfg.get("resolutions")) keyed("sweep settings", [&] {
            sw.validate();
            return 0;
        });

    if (auto v = cfg.get("directions")) {
        s.probe_directions.clear();
        for (auto r : split(*v, ',')) {
            const int k = to_int("directions", r);
            if (k < 1) throw ConfigError("key 'directions': sine modes start at 1");
            s.probe_directions.push_back(k);
        }
    }
    if (auto v = cfg.get("scales")) {
        s.probe_scales.clear();
        for (auto r : split(*v, ',')) {
            const double h = to_double("scales", r);
            if (!(h > 0.0)) throw ConfigError("key 'scales': must be positive");
            s.probe_scales.push_back(h);
        }
    }
    return s;
}

}  // namespace gltransit
