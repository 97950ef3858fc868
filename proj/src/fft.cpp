#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace msfi::detail {

namespace {

// FFTW plan creation is not thread-safe; execution of distinct plans is.
// Plans are created once per (dims, sign) with FFTW_UNALIGNED so that the
// new-array execute interface accepts any buffer, keeping results identical
// regardless of allocation.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan plan_for(const std::vector<int>& dims, int sign) {
    static std::map<std::pair<std::vector<int>, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto key = std::make_pair(dims, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    // Planning buffer is kept alive for the lifetime of the process.
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(std::move(key), plan);
    return plan;
}

}  // namespace

void fft_nd(std::complex<double>* data, const std::vector<int>& dims, int sign) {
    fftw_plan plan = plan_for(dims, sign);
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, raw, raw);
}

}  // namespace msfi::detail
