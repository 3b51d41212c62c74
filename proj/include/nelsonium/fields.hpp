#ifndef NELSONIUM_FIELDS_HPP
#define NELSONIUM_FIELDS_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "nelsonium/grid.hpp"

namespace nelsonium {

using cplx = std::complex<double>;

// Grid-backed arrays. Fields are immutable after construction; every operation
// returns a new field, so sharing read-only references across threads is safe.

class RealField {
  public:
    RealField() = default;
    RealField(Grid grid, std::vector<double> values);

    static RealField zeros(const Grid& grid);
    static RealField constant(const Grid& grid, double c);
    // f receives the D coordinates of each node.
    static RealField from_function(const Grid& grid, const std::function<double(const double*)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

    double max_abs() const;
    double max() const;

  private:
    Grid grid_;
    std::vector<double> values_;
};

class ComplexField {
  public:
    ComplexField() = default;
    ComplexField(Grid grid, std::vector<cplx> values);

    static ComplexField zeros(const Grid& grid);
    static ComplexField from_function(const Grid& grid, const std::function<cplx(const double*)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    cplx operator[](std::size_t i) const { return values_[i]; }
    const std::vector<cplx>& values() const { return values_; }

    // L2 norm with the quadrature weight: sqrt(dx^D * sum |psi|^2).
    double norm() const;
    RealField abs_squared() const;

  private:
    Grid grid_;
    std::vector<cplx> values_;
};

// D real components on a D-dimensional grid, stored component-major.
class VectorField {
  public:
    VectorField() = default;
    VectorField(Grid grid, std::vector<std::vector<double>> components);

    static VectorField zeros(const Grid& grid);

    const Grid& grid() const { return grid_; }
    std::uint32_t components() const { return static_cast<std::uint32_t>(comp_.size()); }
    const std::vector<double>& component(std::uint32_t c) const { return comp_[c]; }
    const RealField component_field(std::uint32_t c) const;

  private:
    Grid grid_;
    std::vector<std::vector<double>> comp_;
};

// Elementwise helpers (operands must share a grid).
RealField add(const RealField& a, const RealField& b);
RealField subtract(const RealField& a, const RealField& b);
RealField scale(const RealField& a, double s);
RealField multiply(const RealField& a, const RealField& b);
VectorField add(const VectorField& a, const VectorField& b);

// Normalizes psi to unit L2 norm.
ComplexField normalized(const ComplexField& psi);

// Tensor power of a 1-axis wavefunction on the matching n-axis grid.
ComplexField tensor_power(const ComplexField& phi, std::uint32_t n);

} // namespace nelsonium

#endif
