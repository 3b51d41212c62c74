#ifndef NELSONIUM_GRID_HPP
#define NELSONIUM_GRID_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nelsonium {

// Uniform periodic grid on the box [-L/2, L/2)^D with M points per axis.
// Storage convention everywhere: flat row-major, axis 0 slowest.
struct Grid {
    double box_length = 0.0;         // L, identical for every axis
    std::uint32_t points_per_axis = 0; // M, power of two
    std::uint32_t total_dims = 0;      // D = n_particles * space_dim (space_dim = 1)
    double spacing = 0.0;              // dx = L / M

    std::size_t size() const;                       // M^D
    std::size_t stride(std::uint32_t axis) const;   // M^(D-1-axis)
    double node(std::size_t i) const { return -0.5 * box_length + static_cast<double>(i) * spacing; }

    // Wavenumber of DFT bin j along any axis: 2*pi*j'/L with j' in [-M/2, M/2).
    double wavenumber(std::size_t j) const;

    void unflatten(std::size_t idx, std::uint32_t* out) const;
    std::size_t flatten(const std::uint32_t* idx) const;

    // Physical coordinates of a flat index.
    void coords(std::size_t idx, double* out) const;

    bool operator==(const Grid& other) const;
};

inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 26;

// Validates M (power of two, >= 8), D >= 1, L > 0 and the M^D point budget.
// Throws std::invalid_argument with an explicit size report on violation.
Grid build_grid(double L, std::uint32_t M, std::uint32_t D,
                std::size_t max_points = kDefaultPointBudget);

} // namespace nelsonium

#endif
