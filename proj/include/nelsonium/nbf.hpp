#ifndef NELSONIUM_NBF_HPP
#define NELSONIUM_NBF_HPP

#include <string>
#include <vector>

#include "nelsonium/fields.hpp"

namespace nelsonium {

// NBF1 binary field files: 16-byte header ("NBF1", format version, zero
// padding), then u32 D, u32 M, f64 L, then the little-endian f64 payload.
// Real fields store one value per node, complex fields store re:im pairs;
// readers tell the two apart by payload length.
void write_nbf(const std::string& path, const RealField& f);
void write_nbf(const std::string& path, const ComplexField& f);

bool nbf_is_complex(const std::string& path);
RealField read_nbf_real(const std::string& path);
ComplexField read_nbf_complex(const std::string& path);

// NPE1 path-ensemble files: 16-byte header ("NPE1", version, padding), then
// u32 n_paths, u32 n_frames, u32 D, u32 reserved, f64 L, then n_frames f64
// times, then frame-major f64 positions (frame, path, axis).
struct PathFrames {
    double box_length = 0.0;
    std::uint32_t n_paths = 0;
    std::uint32_t n_frames = 0;
    std::uint32_t dims = 0;
    std::vector<double> times;      // n_frames
    std::vector<double> positions;  // n_frames * n_paths * dims
};

void write_npe(const std::string& path, const PathFrames& frames);
PathFrames read_npe(const std::string& path);

} // namespace nelsonium

#endif
