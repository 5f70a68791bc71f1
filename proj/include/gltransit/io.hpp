#pragma once

#include "gltransit/grid.hpp"
#include "gltransit/model.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gltransit {

/// A file could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip form with 17 significant digits ("%.17g").
std::string format17(double v);

/// One row per time level: t, then the M-1 nodal values of xi (or eta when `dual`).
std::string path_csv(const PathPair& path, const SpaceTimeGrid& g, bool dual = false);

/// Rows x, phi_plus, phi_minus over the interior nodes.
std::string stable_states_csv(const StablePair& sp, const SpaceTimeGrid& g);

/// Writes `text` to `file`, creating parent directories. Throws IoError on failure.
void write_text(const std::filesystem::path& file, std::string_view text);

}  // namespace gltransit
