#include "nelsonium/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nelsonium {

double integrate(const RealField& f) {
    const Grid& g = f.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += f[i];
    double weight = 1.0;
    for (std::uint32_t a = 0; a < g.total_dims; ++a) weight *= g.spacing;
    return sum * weight;
}

RealField integrate_axes(const RealField& f, const std::vector<std::uint32_t>& axes_out) {
    const Grid& g = f.grid();
    std::vector<bool> removed(g.total_dims, false);
    for (std::uint32_t a : axes_out) {
        if (a >= g.total_dims) throw std::invalid_argument("integrate_axes: axis out of range");
        if (removed[a]) throw std::invalid_argument("integrate_axes: duplicate axis");
        removed[a] = true;
    }
    std::vector<std::uint32_t> kept;
    for (std::uint32_t a = 0; a < g.total_dims; ++a)
        if (!removed[a]) kept.push_back(a);
    if (kept.empty()) throw std::invalid_argument("integrate_axes: at least one axis must remain");
    if (kept.size() == g.total_dims) return f;

    Grid out_grid = g;
    out_grid.total_dims = static_cast<std::uint32_t>(kept.size());
    std::vector<std::size_t> kept_weight(kept.size());
    for (std::size_t p = 0; p < kept.size(); ++p)
        kept_weight[p] = out_grid.stride(static_cast<std::uint32_t>(p));

    std::vector<double> out(out_grid.size(), 0.0);
    std::vector<std::uint32_t> idx(g.total_dims);
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        g.unflatten(flat, idx.data());
        std::size_t out_flat = 0;
        for (std::size_t p = 0; p < kept.size(); ++p) out_flat += idx[kept[p]] * kept_weight[p];
        out[out_flat] += f[flat];
    }
    double weight = 1.0;
    for (std::size_t p = kept.size(); p < g.total_dims; ++p) weight *= g.spacing;
    for (double& v : out) v *= weight;
    return RealField(out_grid, std::move(out));
}

namespace {

// Corner indices and weights for periodic multilinear interpolation.
struct InterpStencil {
    std::vector<std::size_t> base;  // lower node per axis
    std::vector<double> frac;       // fractional offset per axis
};

InterpStencil stencil_at(const Grid& g, const double* point) {
    InterpStencil s;
    s.base.resize(g.total_dims);
    s.frac.resize(g.total_dims);
    const auto M = static_cast<double>(g.points_per_axis);
    for (std::uint32_t a = 0; a < g.total_dims; ++a) {
        double u = (point[a] + 0.5 * g.box_length) / g.spacing;
        double fl = std::floor(u);
        double frac = u - fl;
        double wrapped = std::fmod(fl, M);
        if (wrapped < 0.0) wrapped += M;
        s.base[a] = static_cast<std::size_t>(wrapped);
        s.frac[a] = frac;
    }
    return s;
}

template <typename Accum>
void for_each_corner(const Grid& g, const InterpStencil& s, Accum accum) {
    const std::uint32_t D = g.total_dims;
    const std::size_t corners = std::size_t{1} << D;
    std::vector<std::uint32_t> idx(D);
    for (std::size_t mask = 0; mask < corners; ++mask) {
        double w = 1.0;
        for (std::uint32_t a = 0; a < D; ++a) {
            const bool upper = (mask >> a) & 1u;
            w *= upper ? s.frac[a] : 1.0 - s.frac[a];
            std::size_t node = s.base[a] + (upper ? 1 : 0);
            if (node == g.points_per_axis) node = 0;
            idx[a] = static_cast<std::uint32_t>(node);
        }
        accum(g.flatten(idx.data()), w);
    }
}

} // namespace

double interpolate(const RealField& f, const double* point) {
    const Grid& g = f.grid();
    InterpStencil s = stencil_at(g, point);
    double value = 0.0;
    for_each_corner(g, s, [&](std::size_t flat, double w) { value += w * f[flat]; });
    if (!std::isfinite(value)) throw std::runtime_error("interpolate: non-finite field value at stencil");
    return value;
}

std::vector<double> interpolate(const VectorField& f, const double* point) {
    std::vector<double> value(f.components(), 0.0);
    interpolate(f, point, value.data());
    return value;
}

void interpolate(const VectorField& f, const double* point, double* out) {
    const Grid& g = f.grid();
    const std::uint32_t D = g.total_dims;
    if (D > 16) throw std::invalid_argument("interpolate: more than 16 axes unsupported");
    const auto Md = static_cast<double>(g.points_per_axis);

    std::size_t base[16];
    double frac[16];
    for (std::uint32_t a = 0; a < D; ++a) {
        const double u = (point[a] + 0.5 * g.box_length) / g.spacing;
        const double fl = std::floor(u);
        frac[a] = u - fl;
        double wrapped = std::fmod(fl, Md);
        if (wrapped < 0.0) wrapped += Md;
        base[a] = static_cast<std::size_t>(wrapped);
    }
    for (std::uint32_t c = 0; c < f.components(); ++c) out[c] = 0.0;

    const std::size_t corners = std::size_t{1} << D;
    for (std::size_t mask = 0; mask < corners; ++mask) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::uint32_t a = 0; a < D; ++a) {
            const bool upper = (mask >> a) & 1u;
            w *= upper ? frac[a] : 1.0 - frac[a];
            std::size_t node = base[a] + (upper ? 1 : 0);
            if (node == g.points_per_axis) node = 0;
            flat += node * g.stride(a);
        }
        for (std::uint32_t c = 0; c < f.components(); ++c) out[c] += w * f.component(c)[flat];
    }
    for (std::uint32_t c = 0; c < f.components(); ++c)
        if (!std::isfinite(out[c]))
            throw std::runtime_error("interpolate: non-finite field value at stencil");
}

} // namespace nelsonium
