#include "nelsonium/spectral.hpp"

#include <stdexcept>

#include "nelsonium/fft.hpp"

namespace nelsonium {

namespace {

// Applies a per-mode multiplier in Fourier space and transforms back.
// mul(j) receives the integer mode index along `axis`.
template <typename Mul>
void apply_axis_multiplier(const Grid& grid, std::vector<cplx>& data, std::uint32_t axis, Mul mul) {
    fft_forward(grid, data.data());
    const std::size_t n = grid.size();
    std::vector<std::uint32_t> idx(grid.total_dims);
    for (std::size_t flat = 0; flat < n; ++flat) {
        grid.unflatten(flat, idx.data());
        data[flat] *= mul(idx[axis]);
    }
    fft_inverse(grid, data.data());
}

} // namespace

ComplexField spectral_gradient(const ComplexField& f, std::uint32_t axis) {
    const Grid& g = f.grid();
    if (axis >= g.total_dims) throw std::invalid_argument("spectral_gradient: axis out of range");
    std::vector<cplx> work(f.values());
    apply_axis_multiplier(g, work, axis, [&g](std::uint32_t j) { return cplx(0.0, g.wavenumber(j)); });
    return ComplexField(g, std::move(work));
}

RealField spectral_gradient(const RealField& f, std::uint32_t axis) {
    const Grid& g = f.grid();
    if (axis >= g.total_dims) throw std::invalid_argument("spectral_gradient: axis out of range");
    std::vector<cplx> work(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) work[i] = cplx(f[i], 0.0);
    apply_axis_multiplier(g, work, axis, [&g](std::uint32_t j) { return cplx(0.0, g.wavenumber(j)); });
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = work[i].real();
    return RealField(g, std::move(out));
}

RealField spectral_second_derivative(const RealField& f, std::uint32_t axis) {
    const Grid& g = f.grid();
    if (axis >= g.total_dims) throw std::invalid_argument("spectral_second_derivative: axis out of range");
    std::vector<cplx> work(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) work[i] = cplx(f[i], 0.0);
    apply_axis_multiplier(g, work, axis, [&g](std::uint32_t j) {
        const double k = g.wavenumber(j);
        return cplx(-k * k, 0.0);
    });
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = work[i].real();
    return RealField(g, std::move(out));
}

RealField spectral_laplacian(const RealField& f) {
    const Grid& g = f.grid();
    std::vector<cplx> work(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) work[i] = cplx(f[i], 0.0);
    fft_forward(g, work.data());
    const std::size_t n = g.size();
    std::vector<std::uint32_t> idx(g.total_dims);
    for (std::size_t flat = 0; flat < n; ++flat) {
        g.unflatten(flat, idx.data());
        double k2 = 0.0;
        for (std::uint32_t a = 0; a < g.total_dims; ++a) {
            const double k = g.wavenumber(idx[a]);
            k2 += k * k;
        }
        work[flat] *= -k2;
    }
    fft_inverse(g, work.data());
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = work[i].real();
    return RealField(g, std::move(out));
}

std::vector<cplx> convolution_kernel_fft(const RealField& kernel) {
    const Grid& g = kernel.grid();
    std::vector<cplx> work(kernel.size());
    for (std::size_t i = 0; i < kernel.size(); ++i) work[i] = cplx(kernel[i], 0.0);
    fft_forward(g, work.data());
    // The DFT convolves by index, but index 0 sits at coordinate -L/2: the
    // displacement x_m - x_j lives at index (m - j) + M/2 per axis. Folding
    // that half-box circular shift into the kernel transform is a (-1)^k
    // factor per axis mode, which keeps the convolution a coordinate one.
    const std::size_t n = g.size();
    std::vector<std::uint32_t> idx(g.total_dims);
    for (std::size_t flat = 0; flat < n; ++flat) {
        g.unflatten(flat, idx.data());
        std::uint32_t parity = 0;
        for (std::uint32_t a = 0; a < g.total_dims; ++a) parity += idx[a];
        if (parity & 1u) work[flat] = -work[flat];
    }
    return work;
}

RealField periodic_convolution_with_kernel(const RealField& b, const std::vector<cplx>& kernel_fft) {
    const Grid& g = b.grid();
    if (kernel_fft.size() != g.size())
        throw std::invalid_argument("periodic_convolution_with_kernel: kernel size mismatch");
    std::vector<cplx> work(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) work[i] = cplx(b[i], 0.0);
    fft_forward(g, work.data());
    for (std::size_t i = 0; i < work.size(); ++i) work[i] *= kernel_fft[i];
    fft_inverse(g, work.data());
    // DFT of the cyclic sum carries no dx; the Riemann weight enters here.
    double weight = 1.0;
    for (std::uint32_t a = 0; a < g.total_dims; ++a) weight *= g.spacing;
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = work[i].real() * weight;
    return RealField(g, std::move(out));
}

RealField periodic_convolution(const RealField& a, const RealField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("periodic_convolution: grid mismatch");
    return periodic_convolution_with_kernel(b, convolution_kernel_fft(a));
}

} // namespace nelsonium

