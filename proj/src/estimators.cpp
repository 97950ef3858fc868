#include "msfi/estimators.hpp"

#include "msfi/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace msfi::estimators {

int thread_count() {
    if (const char* env = std::getenv("MSFI_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Evaluates fn(r) for every replicate index and returns the results in
// replicate order, regardless of how many threads did the work.
template <typename T>
std::vector<T> run_replicates(std::int64_t n, const std::function<T(std::int64_t)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(n));
    int workers = std::min<std::int64_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::int64_t r = 0; r < n; ++r) out[static_cast<std::size_t>(r)] = fn(r);
        return out;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            std::int64_t r = next.fetch_add(1);
            if (r >= n) return;
            try {
                out[static_cast<std::size_t>(r)] = fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

double mean_of(const std::vector<double>& xs) {
    return kahan_total(xs) / static_cast<double>(xs.size());
}

// Standard error of the mean, s / sqrt(n).
double std_error_of_mean(const std::vector<double>& xs) {
    double m = mean_of(xs);
    KahanSum sq;
    for (double x : xs) sq.add((x - m) * (x - m));
    double n = static_cast<double>(xs.size());
    return std::sqrt(sq.value() / (n - 1.0)) / std::sqrt(n);
}

std::optional<double> analytic_mean_of_F(const fieldgen::FieldModel& model,
                                         const functionals::LocalFunctional& f) {
    // The mean is linear through cell values and ball averages; thresholds
    // have no closed form here.
    if (f.kind == functionals::LocalFunctional::Kind::Threshold) return std::nullopt;
    return model.analytic_mean();
}

struct AverageBatch {
    std::vector<double> x;  // centered X_L per replicate, replicate order
    bool pooled = false;
    bool truncated = false;
};

AverageBatch compute_averages(const fieldgen::FieldModel& model,
                              const functionals::LocalFunctional& f,
                              functionals::AverageKind kind, double L, std::int64_t replicates,
                              std::uint64_t seed) {
    model.validate();
    f.validate();
    if (replicates < 2) throw std::invalid_argument("estimator: replicates must be >= 2");
    if (!(L > 0.0)) throw std::invalid_argument("estimator: L must be positive");

    std::optional<double> mean_F = analytic_mean_of_F(model, f);
    bool pooled = !mean_F.has_value();
    double mass = functionals::kernel_mass(model.grid, L, kind);

    struct Raw {
        double raw = 0.0;
        double field_mean = 0.0;
        bool truncated = false;
    };
    std::function<Raw(std::int64_t)> task = [&](std::int64_t r) {
        auto A = fieldgen::sample_field(model, replicate_seed(seed, static_cast<std::uint64_t>(r)));
        auto F = functionals::transform_field(f, A);
        auto avg = functionals::spatial_average(F, 0.0, L, kind);
        Raw out;
        out.raw = avg.value;
        out.truncated = avg.truncated;
        if (pooled) out.field_mean = mean_of(F.values);
        return out;
    };
    auto raws = run_replicates<Raw>(replicates, task);

    double center = 0.0;
    if (pooled) {
        KahanSum pool;
        for (const auto& r : raws) pool.add(r.field_mean);
        center = pool.value() / static_cast<double>(replicates);
    } else {
        center = *mean_F;
    }

    AverageBatch batch;
    batch.pooled = pooled;
    batch.truncated = raws.front().truncated;
    batch.x.resize(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) {
        batch.x[i] = raws[i].raw - center * mass;
    }
    return batch;
}

void apply_batch_flags(Estimate& est, const AverageBatch& batch) {
    if (batch.pooled) est.flags.insert("pooled-mean");
    if (batch.truncated) est.flags.insert("kernel-truncation");
}

}  // namespace

void EventFamily::validate() const {
    if (levels.empty()) throw std::invalid_argument("EventFamily: levels must be nonempty");
    for (double v : levels) {
        if (!std::isfinite(v)) throw std::invalid_argument("EventFamily: levels must be finite");
    }
    if (!std::is_sorted(levels.begin(), levels.end())) {
        throw std::invalid_argument("EventFamily: levels must be sorted");
    }
    if (!(region_size > 0.0)) {
        throw std::invalid_argument("EventFamily: region_size must be positive");
    }
}

void MixingQuery::validate(const fieldgen::GridSpec& grid) const {
    family.validate();
    if (!(R >= grid.h)) {
        throw std::invalid_argument("MixingQuery: R must be at least the grid spacing");
    }
    if (!(D > 0.0)) throw std::invalid_argument("MixingQuery: D must be positive");
    double diam = (family.region_size) * std::sqrt(static_cast<double>(grid.d));
    if (std::isfinite(D) && diam > D) {
        throw std::invalid_argument("MixingQuery: region diameter exceeds the cap D");
    }
}

Estimate empirical_covariance(const fieldgen::FieldModel& model, const std::vector<double>& lag,
                              std::int64_t replicates, std::uint64_t seed) {
    model.validate();
    if (replicates < 2) throw std::invalid_argument("empirical_covariance: replicates must be >= 2");
    const auto& grid = model.grid;
    if (static_cast<int>(lag.size()) != grid.d) {
        throw std::invalid_argument("empirical_covariance: lag dimension mismatch");
    }
    std::array<int, 3> offset{0, 0, 0};
    for (int axis = 0; axis < grid.d; ++axis) {
        if (std::abs(lag[axis]) > grid.half_side() + 1e-12) {
            throw std::invalid_argument("empirical_covariance: lag beyond the torus half-side");
        }
        double cells = lag[axis] / grid.h;
        double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-9) {
            throw std::invalid_argument("empirical_covariance: lag must be a multiple of h");
        }
        offset[axis] = grid.min_image(static_cast<int>(rounded));
    }
    // Canonical sign: +lag and -lag share the same summation order.
    for (int axis = 0; axis < grid.d; ++axis) {
        if (offset[axis] == 0) continue;
        if (offset[axis] < 0) {
            for (int j = 0; j < grid.d; ++j) offset[j] = -offset[j];
        }
        break;
    }

    std::optional<double> mean_A = model.analytic_mean();
    bool pooled = !mean_A.has_value();

    struct Raw {
        double product = 0.0;
        double field_mean = 0.0;
    };
    std::function<Raw(std::int64_t)> task = [&](std::int64_t r) {
        auto A = fieldgen::sample_field(model, replicate_seed(seed, static_cast<std::uint64_t>(r)));
        std::int64_t total = grid.cells();
        KahanSum sum;
        for (std::int64_t i = 0; i < total; ++i) {
            auto c = grid.decode(i);
            std::array<int, 3> shifted = c;
            for (int axis = 0; axis < grid.d; ++axis) shifted[axis] += offset[axis];
            sum.add(A.values[i] * A.values[grid.encode(shifted)]);
        }
        Raw out;
        out.product = sum.value() / static_cast<double>(total);
        if (pooled) out.field_mean = mean_of(A.values);
        return out;
    };
    auto raws = run_replicates<Raw>(replicates, task);

    double m = 0.0;
    if (pooled) {
        KahanSum pool;
        for (const auto& r : raws) pool.add(r.field_mean);
        m = pool.value() / static_cast<double>(replicates);
    } else {
        m = *mean_A;
    }

    std::vector<double> values(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) values[i] = raws[i].product - m * m;

    Estimate est;
    est.value = mean_of(values);
    est.std_error = std_error_of_mean(values);
    est.n = replicates;
    est.seed = seed;
    if (pooled) est.flags.insert("pooled-mean");
    return est;
}

Estimate variance_of_average(const fieldgen::FieldModel& model,
                             const functionals::LocalFunctional& f,
                             functionals::AverageKind kind, double L, std::int64_t replicates,
                             std::uint64_t seed) {
    auto batch = compute_averages(model, f, kind, L, replicates, seed);
    double mean = mean_of(batch.x);
    std::vector<double> sq(batch.x.size());
    for (std::size_t i = 0; i < batch.x.size(); ++i) {
        double dev = batch.x[i] - mean;
        sq[i] = dev * dev;
    }
    double n = static_cast<double>(replicates);
    Estimate est;
    est.value = kahan_total(sq) / (n - 1.0);
    est.std_error = std_error_of_mean(sq);
    est.n = replicates;
    est.seed = seed;
    apply_batch_flags(est, batch);
    return est;
}

Estimate tail_probability(const fieldgen::FieldModel& model,
                          const functionals::LocalFunctional& f, functionals::AverageKind kind,
                          double L, double delta, std::int64_t replicates, std::uint64_t seed) {
    if (!std::isfinite(delta)) throw std::invalid_argument("tail_probability: delta must be finite");
    auto batch = compute_averages(model, f, kind, L, replicates, seed);
    std::int64_t hits = 0;
    for (double x : batch.x) {
        if (x >= delta) ++hits;
    }
    double n = static_cast<double>(replicates);
    double p = static_cast<double>(hits) / n;
    Estimate est;
    est.value = p;
    est.std_error = std::sqrt(p * (1.0 - p) / n);
    est.n = replicates;
    est.seed = seed;
    apply_batch_flags(est, batch);
    return est;
}

Estimate moment_of_average(const fieldgen::FieldModel& model,
                           const functionals::LocalFunctional& f, functionals::AverageKind kind,
                           double L, int p, std::int64_t replicates, std::uint64_t seed) {
    if (p < 1 || p > 6) throw std::invalid_argument("moment_of_average: p must lie in [1, 6]");
    auto batch = compute_averages(model, f, kind, L, replicates, seed);
    std::vector<double> powers(batch.x.size());
    for (std::size_t i = 0; i < batch.x.size(); ++i) {
        powers[i] = std::pow(batch.x[i], 2 * p);
    }
    Estimate est;
    est.value = mean_of(powers);
    est.std_error = std_error_of_mean(powers);
    est.n = replicates;
    est.seed = seed;
    apply_batch_flags(est, batch);
    return est;
}

Estimate mixing_coefficient(const fieldgen::FieldModel& model, const MixingQuery& query,
                            std::int64_t replicates, std::uint64_t seed) {
    model.validate();
    if (replicates < 2) throw std::invalid_argument("mixing_coefficient: replicates must be >= 2");
    const auto& grid = model.grid;
    query.validate(grid);

    std::int64_t m = std::llround(query.family.region_size / grid.h);
    if (m < 1) throw std::invalid_argument("mixing_coefficient: region smaller than one cell");
    // Smallest whole-cell gap g with point distance (g+1) h >= R.
    std::int64_t g = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::ceil(query.R / grid.h - 1.0 - 1e-9)));
    std::int64_t o = query.region_offset_cells;
    if (2 * m + g > grid.N || (grid.N - 2 * m - g + 1) * grid.h < query.R) {
        throw std::invalid_argument(
            "mixing_coefficient: regions do not fit on the torus at distance R");
    }

    auto region_cells = [&](std::int64_t start) {
        std::vector<std::int64_t> cells;
        std::array<std::int64_t, 3> it{0, 0, 0};
        std::array<std::int64_t, 3> limit{1, 1, 1};
        for (int axis = 0; axis < grid.d; ++axis) limit[axis] = m;
        for (it[0] = 0; it[0] < limit[0]; ++it[0]) {
            for (it[1] = 0; it[1] < limit[1]; ++it[1]) {
                for (it[2] = 0; it[2] < limit[2]; ++it[2]) {
                    std::array<int, 3> c{0, 0, 0};
                    c[0] = static_cast<int>((start + it[0]) % grid.N);
                    for (int axis = 1; axis < grid.d; ++axis) {
                        c[axis] = static_cast<int>(it[axis]);
                    }
                    cells.push_back(grid.encode(c));
                }
            }
        }
        return cells;
    };
    auto s1 = region_cells(((o % grid.N) + grid.N) % grid.N);
    auto s2 = region_cells((((o + m + g) % grid.N) + grid.N) % grid.N);

    std::function<std::pair<double, double>(std::int64_t)> task = [&](std::int64_t r) {
        auto A = fieldgen::sample_field(model, replicate_seed(seed, static_cast<std::uint64_t>(r)));
        KahanSum a1, a2;
        for (auto i : s1) a1.add(A.values[i]);
        for (auto i : s2) a2.add(A.values[i]);
        double count = static_cast<double>(s1.size());
        return std::make_pair(a1.value() / count, a2.value() / count);
    };
    auto avgs = run_replicates<std::pair<double, double>>(replicates, task);

    const auto& levels = query.family.levels;
    double n = static_cast<double>(replicates);
    double best = -1.0;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = 0; j < levels.size(); ++j) {
            std::int64_t c1 = 0, c2 = 0, c12 = 0;
            for (const auto& [x1, x2] : avgs) {
                bool g1 = x1 >= levels[i];
                bool g2 = x2 >= levels[j];
                c1 += g1;
                c2 += g2;
                c12 += g1 && g2;
            }
            double t = std::abs(c12 / n - (c1 / n) * (c2 / n));
            if (t > best) {
                best = t;
                best_i = i;
                best_j = j;
            }
        }
    }

    // Influence-function standard error of the argmax pair.
    double p1 = 0.0, p2 = 0.0;
    {
        std::int64_t c1 = 0, c2 = 0;
        for (const auto& [x1, x2] : avgs) {
            c1 += x1 >= levels[best_i];
            c2 += x2 >= levels[best_j];
        }
        p1 = c1 / n;
        p2 = c2 / n;
    }
    std::vector<double> influence(avgs.size());
    for (std::size_t k = 0; k < avgs.size(); ++k) {
        double a = avgs[k].first >= levels[best_i] ? 1.0 : 0.0;
        double b = avgs[k].second >= levels[best_j] ? 1.0 : 0.0;
        influence[k] = a * b - p2 * a - p1 * b;
    }

    Estimate est;
    est.value = best;
    est.std_error = std_error_of_mean(influence);
    est.n = replicates;
    est.seed = seed;
    est.flags.insert("argmax-pair-se");
    return est;
}

double ergodic_average(const fieldgen::FieldSample& sample,
                       const functionals::LocalFunctional& f, double R) {
    sample.grid.validate();
    if (!(R >= 0.0) || R > sample.grid.half_side()) {
        throw std::invalid_argument("ergodic_average: R must lie in [0, torus half-side]");
    }
    auto F = functionals::transform_field(f, sample);
    const auto& grid = F.grid;
    std::int64_t total = grid.cells();
    KahanSum sum;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < total; ++i) {
        if (grid.offset_distance(grid.decode(i)) <= R) {
            sum.add(F.values[i]);
            ++count;
        }
    }
    return sum.value() / static_cast<double>(count);
}

}  // namespace msfi::estimators
