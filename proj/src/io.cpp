#include "gltransit/io.hpp"

#include <cstdio>
#include <fstream>

namespace gltransit {

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string path_csv(const PathPair& path, const SpaceTimeGrid& g, bool dual) {
    path.check(g);
    std::string out = "t";
    for (std::size_t i = 0; i < g.interior(); ++i) out += ",x" + std::to_string(i + 1);
    out += '\n';
    for (std::size_t n = 0; n < g.levels(); ++n) {
        out += format17(g.t(n));
        for (double v : dual ? path.eta(n) : path.xi(n)) {
            out += ',';
            out += format17(v);
        }
        out += '\n';
    }
    return out;
}

std::string stable_states_csv(const StablePair& sp, const SpaceTimeGrid& g) {
    check_field(sp.phi_plus.span(), g, "phi_plus");
    check_field(sp.phi_minus.span(), g, "phi_minus");
    std::string out = "x,phi_plus,phi_minus\n";
    for (std::size_t i = 0; i < g.interior(); ++i) {
        out += format17(g.x(i)) + ',' + format17(sp.phi_plus[i]) + ',' + format17(sp.phi_minus[i]) + '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& file, std::string_view text) {
    std::error_code ec;
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + file.string() + "' for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    os.close();
    if (!os) throw IoError("failed writing '" + file.string() + "'");
}

}  // namespace gltransit
