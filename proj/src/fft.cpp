#include "nelsonium/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace nelsonium {

namespace {

// FFTW planning is not thread-safe; executing a plan on new arrays is.
// FFTW_UNALIGNED lets one plan serve any std::vector buffer.
class PlanCache {
  public:
    static fftw_plan get(std::uint32_t M, std::uint32_t D, int sign) {
        static PlanCache cache;
        std::lock_guard<std::mutex> lock(cache.mutex_);
        const Key key{M, D, sign};
        auto it = cache.plans_.find(key);
        if (it != cache.plans_.end()) return it->second;

        std::vector<int> dims(D, static_cast<int>(M));
        std::size_t n = 1;
        for (std::uint32_t a = 0; a < D; ++a) n *= M;
        // Scratch buffer only used at planning time.
        std::vector<std::complex<double>> scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(static_cast<int>(D), dims.data(), buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.plans_.emplace(key, plan);
        return plan;
    }

  private:
    using Key = std::tuple<std::uint32_t, std::uint32_t, int>;
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

} // namespace

void fft_forward(const Grid& grid, std::complex<double>* data) {
    fftw_plan plan = PlanCache::get(grid.points_per_axis, grid.total_dims, FFTW_FORWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

void fft_inverse(const Grid& grid, std::complex<double>* data) {
    fftw_plan plan = PlanCache::get(grid.points_per_axis, grid.total_dims, FFTW_BACKWARD);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
    const double scale = 1.0 / static_cast<double>(grid.size());
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
}

} // namespace nelsonium
