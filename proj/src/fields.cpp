#include "nelsonium/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nelsonium {

namespace {
void check_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}
} // namespace

RealField::RealField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("RealField: value count does not match grid size");
}

RealField RealField::zeros(const Grid& grid) {
    return RealField(grid, std::vector<double>(grid.size(), 0.0));
}

RealField RealField::constant(const Grid& grid, double c) {
    return RealField(grid, std::vector<double>(grid.size(), c));
}

RealField RealField::from_function(const Grid& grid,
                                   const std::function<double(const double*)>& f) {
    std::vector<double> v(grid.size());
    std::vector<double> x(grid.total_dims);
    for (std::size_t i = 0; i < v.size(); ++i) {
        grid.coords(i, x.data());
        v[i] = f(x.data());
    }
    return RealField(grid, std::move(v));
}

double RealField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double RealField::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::max(m, v);
    return m;
}

ComplexField::ComplexField(Grid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("ComplexField: value count does not match grid size");
}

ComplexField ComplexField::zeros(const Grid& grid) {
    return ComplexField(grid, std::vector<cplx>(grid.size(), cplx{0.0, 0.0}));
}

ComplexField ComplexField::from_function(const Grid& grid,
                                         const std::function<cplx(const double*)>& f) {
    std::vector<cplx> v(grid.size());
    std::vector<double> x(grid.total_dims);
    for (std::size_t i = 0; i < v.size(); ++i) {
        grid.coords(i, x.data());
        v[i] = f(x.data());
    }
    return ComplexField(grid, std::move(v));
}

double ComplexField::norm() const {
    double s = 0.0;
    for (const cplx& z : values_) s += std::norm(z);
    double w = 1.0;
    for (std::uint32_t a = 0; a < grid_.total_dims; ++a) w *= grid_.spacing;
    return std::sqrt(s * w);
}

RealField ComplexField::abs_squared() const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::norm(values_[i]);
    return RealField(grid_, std::move(v));
}

VectorField::VectorField(Grid grid, std::vector<std::vector<double>> components)
    : grid_(grid), comp_(std::move(components)) {
    for (const auto& c : comp_)
        if (c.size() != grid_.size())
            throw std::invalid_argument("VectorField: component size does not match grid size");
}

VectorField VectorField::zeros(const Grid& grid) {
    std::vector<std::vector<double>> c(grid.total_dims, std::vector<double>(grid.size(), 0.0));
    return VectorField(grid, std::move(c));
}

const RealField VectorField::component_field(std::uint32_t c) const {
    return RealField(grid_, comp_[c]);
}

RealField add(const RealField& a, const RealField& b) {
    check_same_grid(a.grid(), b.grid(), "add");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
    return RealField(a.grid(), std::move(v));
}

RealField subtract(const RealField& a, const RealField& b) {
    check_same_grid(a.grid(), b.grid(), "subtract");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
    return RealField(a.grid(), std::move(v));
}

RealField scale(const RealField& a, double s) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * s;
    return RealField(a.grid(), std::move(v));
}

RealField multiply(const RealField& a, const RealField& b) {
    check_same_grid(a.grid(), b.grid(), "multiply");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
    return RealField(a.grid(), std::move(v));
}

VectorField add(const VectorField& a, const VectorField& b) {
    check_same_grid(a.grid(), b.grid(), "add");
    if (a.components() != b.components())
        throw std::invalid_argument("add: component count mismatch");
    std::vector<std::vector<double>> c(a.components());
    for (std::uint32_t k = 0; k < a.components(); ++k) {
        c[k].resize(a.grid().size());
        for (std::size_t i = 0; i < c[k].size(); ++i) c[k][i] = a.component(k)[i] + b.component(k)[i];
    }
    return VectorField(a.grid(), std::move(c));
}

ComplexField normalized(const ComplexField& psi) {
    const double n = psi.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("normalized: field has zero or non-finite norm");
    std::vector<cplx> v(psi.values());
    for (cplx& z : v) z /= n;
    return ComplexField(psi.grid(), std::move(v));
}

ComplexField tensor_power(const ComplexField& phi, std::uint32_t n) {
    const Grid& g1 = phi.grid();
    if (g1.total_dims != 1) throw std::invalid_argument("tensor_power: expects a 1-axis field");
    const Grid gn = build_grid(g1.box_length, g1.points_per_axis, n);
    std::vector<cplx> v(gn.size());
    std::vector<std::uint32_t> idx(n);
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        gn.unflatten(flat, idx.data());
        cplx p{1.0, 0.0};
        for (std::uint32_t a = 0; a < n; ++a) p *= phi[idx[a]];
        v[flat] = p;
    }
    return ComplexField(gn, std::move(v));
}

} // namespace nelsonium
