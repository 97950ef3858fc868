#pragma once

#include <cstdint>
#include <vector>

namespace msfi {

/// Compensated (Kahan) accumulator. Reductions over replicates use this in a
/// fixed order so that threaded and serial runs produce identical bits.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

/// splitmix64 finalizer, used to derive well-separated seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of replicate r in a run keyed by master_seed.
inline std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t r) {
    return splitmix64(splitmix64(master_seed) ^
                      (r * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL));
}

}  // namespace msfi
