#include "nelsonium/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nelsonium {

std::size_t Grid::size() const {
    std::size_t n = 1;
    for (std::uint32_t a = 0; a < total_dims; ++a) n *= points_per_axis;
    return n;
}

std::size_t Grid::stride(std::uint32_t axis) const {
    std::size_t s = 1;
    for (std::uint32_t a = axis + 1; a < total_dims; ++a) s *= points_per_axis;
    return s;
}

double Grid::wavenumber(std::size_t j) const {
    const auto M = static_cast<std::ptrdiff_t>(points_per_axis);
    auto jj = static_cast<std::ptrdiff_t>(j);
    if (jj >= M / 2) jj -= M;
    return 2.0 * std::numbers::pi * static_cast<double>(jj) / box_length;
}

void Grid::unflatten(std::size_t idx, std::uint32_t* out) const {
    for (std::uint32_t a = total_dims; a-- > 0;) {
        out[a] = static_cast<std::uint32_t>(idx % points_per_axis);
        idx /= points_per_axis;
    }
}

std::size_t Grid::flatten(const std::uint32_t* idx) const {
    std::size_t flat = 0;
    for (std::uint32_t a = 0; a < total_dims; ++a) flat = flat * points_per_axis + idx[a];
    return flat;
}

void Grid::coords(std::size_t idx, double* out) const {
    for (std::uint32_t a = total_dims; a-- > 0;) {
        out[a] = node(idx % points_per_axis);
        idx /= points_per_axis;
    }
}

bool Grid::operator==(const Grid& other) const {
    return box_length == other.box_length && points_per_axis == other.points_per_axis &&
           total_dims == other.total_dims;
}

Grid build_grid(double L, std::uint32_t M, std::uint32_t D, std::size_t max_points) {
    if (!(L > 0.0)) throw std::invalid_argument("build_grid: box length must be positive");
    if (D < 1) throw std::invalid_argument("build_grid: dimension count must be >= 1");
    if (M < 8 || (M & (M - 1)) != 0) {
        std::ostringstream msg;
        msg << "build_grid: points_per_axis must be a power of two >= 8, got " << M;
        throw std::invalid_argument(msg.str());
    }
    // Overflow-safe M^D budget check.
    std::size_t n = 1;
    for (std::uint32_t a = 0; a < D; ++a) {
        if (n > max_points / M) {
            std::ostringstream msg;
            msg << "build_grid: grid of " << M << "^" << D
                << " points exceeds the memory budget of " << max_points
                << " points (" << (max_points >> 17) << " MiB of complex values)";
            throw std::invalid_argument(msg.str());
        }
        n *= M;
    }
    Grid g;
    g.box_length = L;
    g.points_per_axis = M;
    g.total_dims = D;
    g.spacing = L / static_cast<double>(M);
    return g;
}

} // namespace nelsonium
