#include "nelsonium/nbf.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nelsonium {

// Payloads are written little-endian by raw memcpy, so the host must match.
static_assert(std::endian::native == std::endian::little,
              "NBF1/NPE1 I/O requires a little-endian host");

namespace {

constexpr char kFieldMagic[4] = {'N', 'B', 'F', '1'};
constexpr char kPathMagic[4] = {'N', 'P', 'E', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void write_header(std::ofstream& out, const char magic[4]) {
    char header[16] = {};
    std::memcpy(header, magic, 4);
    std::memcpy(header + 4, &kFormatVersion, 4);
    out.write(header, 16);
}

void read_header(std::ifstream& in, const char magic[4], const std::string& path) {
    char header[16] = {};
    in.read(header, 16);
    if (!in || std::memcmp(header, magic, 4) != 0)
        throw std::runtime_error("not a " + std::string(magic, 4) + " file: " + path);
    std::uint32_t version = 0;
    std::memcpy(&version, header + 4, 4);
    if (version != kFormatVersion)
        throw std::runtime_error("unsupported " + std::string(magic, 4) + " version in " + path);
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

struct FieldHeader {
    Grid grid;
    std::size_t payload_doubles = 0;
};

FieldHeader read_field_header(std::ifstream& in, const std::string& path) {
    read_header(in, kFieldMagic, path);
    const auto D = read_pod<std::uint32_t>(in);
    const auto M = read_pod<std::uint32_t>(in);
    const auto L = read_pod<double>(in);
    if (!in) throw std::runtime_error("truncated NBF1 header: " + path);
    FieldHeader h;
    h.grid = build_grid(L, M, D);
    const auto here = in.tellg();
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    h.payload_doubles = static_cast<std::size_t>(end - here) / sizeof(double);
    return h;
}

} // namespace

void write_nbf(const std::string& path, const RealField& f) {
    auto out = open_for_write(path);
    write_header(out, kFieldMagic);
    write_pod(out, f.grid().total_dims);
    write_pod(out, f.grid().points_per_axis);
    write_pod(out, f.grid().box_length);
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_nbf(const std::string& path, const ComplexField& f) {
    auto out = open_for_write(path);
    write_header(out, kFieldMagic);
    write_pod(out, f.grid().total_dims);
    write_pod(out, f.grid().points_per_axis);
    write_pod(out, f.grid().box_length);
    // std::complex<double> is layout-compatible with double[2] (re, im).
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * 2 * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

bool nbf_is_complex(const std::string& path) {
    auto in = open_for_read(path);
    FieldHeader h = read_field_header(in, path);
    const std::size_t n = h.grid.size();
    if (h.payload_doubles == n) return false;
    if (h.payload_doubles == 2 * n) return true;
    throw std::runtime_error("NBF1 payload length matches neither a real nor a complex field: " + path);
}

RealField read_nbf_real(const std::string& path) {
    auto in = open_for_read(path);
    FieldHeader h = read_field_header(in, path);
    const std::size_t n = h.grid.size();
    if (h.payload_doubles != n)
        throw std::runtime_error("NBF1 file does not hold a real field: " + path);
    std::vector<double> values(n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated NBF1 payload: " + path);
    return RealField(h.grid, std::move(values));
}

ComplexField read_nbf_complex(const std::string& path) {
    auto in = open_for_read(path);
    FieldHeader h = read_field_header(in, path);
    const std::size_t n = h.grid.size();
    if (h.payload_doubles != 2 * n)
        throw std::runtime_error("NBF1 file does not hold a complex field: " + path);
    std::vector<cplx> values(n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(2 * n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated NBF1 payload: " + path);
    return ComplexField(h.grid, std::move(values));
}

void write_npe(const std::string& path, const PathFrames& frames) {
    if (frames.times.size() != frames.n_frames)
        throw std::invalid_argument("write_npe: times length disagrees with n_frames");
    const std::size_t expect = static_cast<std::size_t>(frames.n_frames) * frames.n_paths * frames.dims;
    if (frames.positions.size() != expect)
        throw std::invalid_argument("write_npe: positions length disagrees with header counts");
    auto out = open_for_write(path);
    write_header(out, kPathMagic);
    write_pod(out, frames.n_paths);
    write_pod(out, frames.n_frames);
    write_pod(out, frames.dims);
    write_pod(out, std::uint32_t{0});
    write_pod(out, frames.box_length);
    out.write(reinterpret_cast<const char*>(frames.times.data()),
              static_cast<std::streamsize>(frames.times.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(frames.positions.data()),
              static_cast<std::streamsize>(frames.positions.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

PathFrames read_npe(const std::string& path) {
    auto in = open_for_read(path);
    read_header(in, kPathMagic, path);
    PathFrames frames;
    frames.n_paths = read_pod<std::uint32_t>(in);
    frames.n_frames = read_pod<std::uint32_t>(in);
    frames.dims = read_pod<std::uint32_t>(in);
    (void)read_pod<std::uint32_t>(in);
    frames.box_length = read_pod<double>(in);
    if (!in) throw std::runtime_error("truncated NPE1 header: " + path);
    frames.times.resize(frames.n_frames);
    in.read(reinterpret_cast<char*>(frames.times.data()),
            static_cast<std::streamsize>(frames.times.size() * sizeof(double)));
    const std::size_t n = static_cast<std::size_t>(frames.n_frames) * frames.n_paths * frames.dims;
    frames.positions.resize(n);
    in.read(reinterpret_cast<char*>(frames.positions.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated NPE1 payload: " + path);
    return frames;
}

} // namespace nelsonium
