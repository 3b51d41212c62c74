#include "nelsonium/potentials.hpp"

#include <cmath>
#include <stdexcept>

namespace nelsonium {

double PairPotential::operator()(double r) const {
    switch (kind) {
        case PotentialKind::gaussian_bump:
            return amplitude * std::exp(-r * r / (2.0 * width * width));
        case PotentialKind::cosine_bounded:
            return amplitude * std::cos(r / width);
        case PotentialKind::quadratic_oracle:
            return amplitude * r * r;
    }
    return 0.0;
}

double PairPotential::derivative(double r) const {
    switch (kind) {
        case PotentialKind::gaussian_bump:
            return -amplitude * r / (width * width) * std::exp(-r * r / (2.0 * width * width));
        case PotentialKind::cosine_bounded:
            return -(amplitude / width) * std::sin(r / width);
        case PotentialKind::quadratic_oracle:
            return 2.0 * amplitude * r;
    }
    return 0.0;
}

PairPotential make_potential(const std::string& kind, double amplitude, double width) {
    PairPotential pot;
    pot.amplitude = amplitude;
    pot.width = width;
    if (kind == "gaussian_bump") {
        pot.kind = PotentialKind::gaussian_bump;
    } else if (kind == "cosine_bounded") {
        pot.kind = PotentialKind::cosine_bounded;
    } else if (kind == "quadratic_oracle") {
        pot.kind = PotentialKind::quadratic_oracle;
    } else {
        throw std::invalid_argument("unknown pair potential kind: " + kind);
    }
    if (!(width > 0.0)) throw std::invalid_argument("pair potential width must be positive");
    return pot;
}

std::string potential_kind_name(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::gaussian_bump: return "gaussian_bump";
        case PotentialKind::cosine_bounded: return "cosine_bounded";
        case PotentialKind::quadratic_oracle: return "quadratic_oracle";
    }
    return "?";
}

double periodic_difference(double a, double b, double L) {
    double d = a - b;
    d -= L * std::floor(d / L + 0.5);
    return d;
}

RealField assemble_nbody_potential(const Grid& grid, const PairPotential& pot, std::uint32_t N) {
    if (grid.total_dims != N)
        throw std::invalid_argument("assemble_nbody_potential: grid dimension must equal N");
    if (N < 2) return RealField::zeros(grid);
    const double scale = 1.0 / static_cast<double>(N);
    return RealField::from_function(grid, [&](const double* x) {
        double sum = 0.0;
        for (std::uint32_t j = 0; j < N; ++j)
            for (std::uint32_t k = j + 1; k < N; ++k)
                sum += pot(periodic_difference(x[j], x[k], grid.box_length));
        return scale * sum;
    });
}

RealField assemble_trap(const Grid& grid, double omega) {
    const double half_w2 = 0.5 * omega * omega;
    return RealField::from_function(grid, [&](const double* x) {
        double sum = 0.0;
        for (std::uint32_t a = 0; a < grid.total_dims; ++a) sum += x[a] * x[a];
        return half_w2 * sum;
    });
}

VectorField assemble_nbody_potential_gradient(const Grid& grid, const PairPotential& pot,
                                              std::uint32_t N) {
    if (grid.total_dims != N)
        throw std::invalid_argument("assemble_nbody_potential_gradient: grid dimension must equal N");
    const double scale = 1.0 / static_cast<double>(N);
    std::vector<std::vector<double>> comp(N, std::vector<double>(grid.size(), 0.0));
    std::vector<double> x(N);
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        grid.coords(flat, x.data());
        for (std::uint32_t a = 0; a < N; ++a) {
            double sum = 0.0;
            for (std::uint32_t k = 0; k < N; ++k)
                if (k != a) sum += pot.derivative(periodic_difference(x[a], x[k], grid.box_length));
            comp[a][flat] = scale * sum;
        }
    }
    return VectorField(grid, std::move(comp));
}

VectorField assemble_trap_gradient(const Grid& grid, double omega) {
    const double w2 = omega * omega;
    std::vector<std::vector<double>> comp(grid.total_dims,
                                          std::vector<double>(grid.size(), 0.0));
    std::vector<double> x(grid.total_dims);
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        grid.coords(flat, x.data());
        for (std::uint32_t a = 0; a < grid.total_dims; ++a) comp[a][flat] = w2 * x[a];
    }
    return VectorField(grid, std::move(comp));
}

RealField pair_kernel_field(const Grid& grid, const PairPotential& pot) {
    if (grid.total_dims != 1)
        throw std::invalid_argument("pair_kernel_field: expects a 1-axis grid");
    return RealField::from_function(grid, [&](const double* x) { return pot(x[0]); });
}

} // namespace nelsonium
