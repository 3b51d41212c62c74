// Inspector for NBF1 field files and NPE1 path ensembles: prints the header
// and a few sanity statistics so artifacts can be checked without Python.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "nelsonium/nbf.hpp"

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void dump_field(const std::string& path) {
    if (nelsonium::nbf_is_complex(path)) {
        const nelsonium::ComplexField f = nelsonium::read_nbf_complex(path);
        const nelsonium::Grid& g = f.grid();
        double max_abs = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            max_abs = std::max(max_abs, std::abs(f[i]));
        }
        std::printf("NBF1 complex  D=%u M=%u L=%.17g\n", g.total_dims, g.points_per_axis,
                    g.box_length);
        std::printf("  nodes=%zu  norm=%.17g  max|psi|=%.17g\n", f.size(), f.norm(), max_abs);
        return;
    }
    const nelsonium::RealField f = nelsonium::read_nbf_real(path);
    const nelsonium::Grid& g = f.grid();
    double lo = f[0];
    double hi = f[0];
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        lo = std::min(lo, f[i]);
        hi = std::max(hi, f[i]);
        sum += f[i];
    }
    double weight = 1.0;
    for (std::uint32_t c = 0; c < g.total_dims; ++c) weight *= g.spacing;
    std::printf("NBF1 real  D=%u M=%u L=%.17g\n", g.total_dims, g.points_per_axis, g.box_length);
    std::printf("  nodes=%zu  min=%.17g  max=%.17g  integral=%.17g\n", f.size(), lo, hi,
                sum * weight);
}

void dump_paths(const std::string& path) {
    const nelsonium::PathFrames pf = nelsonium::read_npe(path);
    double lo = 0.0;
    double hi = 0.0;
    if (!pf.positions.empty()) {
        lo = *std::min_element(pf.positions.begin(), pf.positions.end());
        hi = *std::max_element(pf.positions.begin(), pf.positions.end());
    }
    std::printf("NPE1 paths=%u frames=%u dims=%u L=%.17g\n", pf.n_paths, pf.n_frames, pf.dims,
                pf.box_length);
    if (!pf.times.empty()) {
        std::printf("  t in [%.17g, %.17g]  x in [%.17g, %.17g]\n", pf.times.front(),
                    pf.times.back(), lo, hi);
    }
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: nbf_dump <file.nbf|file.npe>\n");
        return 2;
    }
    const std::string path = argv[1];
    try {
        if (ends_with(path, ".npe")) {
            dump_paths(path);
        } else {
            dump_field(path);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
