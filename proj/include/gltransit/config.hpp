#pragma once

#include "gltransit/experiments.hpp"
#include "gltransit/solver.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gltransit {

/// Malformed configuration text, unknown key, or an out-of-range setting.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Plain `key = value` text with optional `[section]` headers and `#` comments.
///
/// Keys are unique across sections; a section only groups keys for the reader.
class Config {
public:
    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& file);

    /// Applies one `key=value` override; `section.key` is accepted too.
    void set(std::string_view assignment);
    void set(std::string_view key, std::string_view value);

    std::optional<std::string> get(std::string_view key) const;
    const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string, std::less<>> values_;
};

bool is_known_key(std::string_view key);
bool is_known_section(std::string_view section);

/// Everything a command needs, validated.
struct RunSettings {
    SchemeKind scheme = SchemeKind::FE;
    SeedKind seed = SeedKind::TwoWall;
    ModelParams params;
    int M = 30;
    int N = 30;
    SolverConfig solver;                 ///< ladder ends at (M, N, delta, K)
    SweepSpec sweep;                     ///< base = solver
    std::vector<int> probe_directions{1, 2};
    std::vector<double> probe_scales{1e-2, 5e-3, 2.5e-3};

    SpaceTimeGrid grid() const { return SpaceTimeGrid(M, N, params.T); }
};

/// Builds and validates settings; throws ConfigError naming the offending key.
RunSettings settings_from(const Config& cfg);

}  // namespace gltransit
