#include "msfi/fieldgen.hpp"

#include "fft.hpp"
#include "msfi/common.hpp"
#include "msfi/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace msfi::fieldgen {

namespace {

std::string fmt(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

double unit_ball_volume(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        default: return 4.0 * std::numbers::pi / 3.0;
    }
}

}  // namespace

void GridSpec::validate() const {
    if (d < 1 || d > 3) throw std::invalid_argument("GridSpec: d must be 1, 2 or 3");
    if (N < 1 || !std::has_single_bit(static_cast<unsigned>(N))) {
        throw std::invalid_argument("GridSpec: N must be a positive power of two");
    }
    if (!(h > 0.0)) throw std::invalid_argument("GridSpec: h must be positive");
    if (!periodic) throw std::invalid_argument("GridSpec: only periodic grids are supported");
    std::int64_t total = 1;
    for (int axis = 0; axis < d; ++axis) {
        total *= N;
        if (total > (std::int64_t{1} << 24)) {
            throw std::invalid_argument("GridSpec: N^d exceeds 2^24 cells");
        }
    }
}

CovarianceModel CovarianceModel::delta_lag(double sigma2) {
    CovarianceModel m;
    m.kind = CovKind::DeltaLag;
    m.sigma2 = sigma2;
    m.validate();
    return m;
}

CovarianceModel CovarianceModel::exponential(double sigma2, double rho) {
    CovarianceModel m;
    m.kind = CovKind::Exponential;
    m.sigma2 = sigma2;
    m.rho = rho;
    m.validate();
    return m;
}

CovarianceModel CovarianceModel::algebraic_decay(double sigma2, double gamma) {
    CovarianceModel m;
    m.kind = CovKind::AlgebraicDecay;
    m.sigma2 = sigma2;
    m.gamma = gamma;
    m.validate();
    return m;
}

void CovarianceModel::validate() const {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("CovarianceModel: sigma2 must be positive");
    if (kind == CovKind::Exponential && !(rho > 0.0)) {
        throw std::invalid_argument("CovarianceModel: rho must be positive");
    }
    if (kind == CovKind::AlgebraicDecay && !(gamma > 0.0)) {
        throw std::invalid_argument("CovarianceModel: gamma must be positive");
    }
}

double CovarianceModel::eval(double r) const {
    switch (kind) {
        case CovKind::DeltaLag:
            return r == 0.0 ? sigma2 : 0.0;
        case CovKind::Exponential:
            return sigma2 * std::exp(-r / rho);
        case CovKind::AlgebraicDecay:
            return sigma2 * std::pow(1.0 + r, -gamma);
    }
    return 0.0;
}

std::string CovarianceModel::label() const {
    switch (kind) {
        case CovKind::DeltaLag:
            return "delta(s2=" + fmt(sigma2) + ")";
        case CovKind::Exponential:
            return "exp(s2=" + fmt(sigma2) + ",rho=" + fmt(rho) + ")";
        case CovKind::AlgebraicDecay:
            return "alg(s2=" + fmt(sigma2) + ",gamma=" + fmt(gamma) + ")";
    }
    return {};
}

RadiusLaw RadiusLaw::fixed(double r) {
    RadiusLaw law;
    law.kind = Kind::Fixed;
    law.r = r;
    if (!(r > 0.0)) throw std::invalid_argument("RadiusLaw: radius must be positive");
    return law;
}

RadiusLaw RadiusLaw::pareto_tail(double r0, double a) {
    RadiusLaw law;
    law.kind = Kind::ParetoTail;
    law.r0 = r0;
    law.a = a;
    if (!(r0 > 0.0)) throw std::invalid_argument("RadiusLaw: r0 must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("RadiusLaw: a must be positive");
    return law;
}

std::string RadiusLaw::label() const {
    if (kind == Kind::Fixed) return "fixed(r=" + fmt(r) + ")";
    return "pareto(r0=" + fmt(r0) + ",a=" + fmt(a) + ")";
}

BlockLaw BlockLaw::bernoulli(double p) {
    BlockLaw law;
    law.kind = Kind::Bernoulli;
    law.p = p;
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("BlockLaw: p must lie in [0, 1]");
    return law;
}

BlockLaw BlockLaw::uniform_pm1() {
    BlockLaw law;
    law.kind = Kind::UniformPM1;
    return law;
}

double BlockLaw::mean() const { return kind == Kind::Bernoulli ? p : 0.0; }

double BlockLaw::variance() const {
    return kind == Kind::Bernoulli ? p * (1.0 - p) : 1.0 / 3.0;
}

std::string BlockLaw::label() const {
    if (kind == Kind::Bernoulli) return "bernoulli(p=" + fmt(p) + ")";
    return "uniform_pm1";
}

FieldModel FieldModel::gaussian(const GridSpec& grid, const CovarianceModel& cov) {
    FieldModel m;
    m.kind = Kind::Gaussian;
    m.grid = grid;
    m.cov = cov;
    m.validate();
    return m;
}

FieldModel FieldModel::boolean(const GridSpec& grid, double intensity, const RadiusLaw& radius) {
    FieldModel m;
    m.kind = Kind::Boolean;
    m.grid = grid;
    m.intensity = intensity;
    m.radius = radius;
    m.validate();
    return m;
}

FieldModel FieldModel::block_iid(const GridSpec& grid, int block, const BlockLaw& law) {
    FieldModel m;
    m.kind = Kind::BlockIID;
    m.grid = grid;
    m.block = block;
    m.law = law;
    m.validate();
    return m;
}

void FieldModel::validate() const {
    grid.validate();
    switch (kind) {
        case Kind::Gaussian:
            cov.validate();
            break;
        case Kind::Boolean:
            if (intensity < 0.0) throw std::invalid_argument("FieldModel: intensity must be nonnegative");
            if (radius.kind == RadiusLaw::Kind::ParetoTail && !(radius.a > grid.d)) {
                throw std::invalid_argument(
                    "FieldModel: ParetoTail exponent a must exceed d (finite mean ball volume)");
            }
            break;
        case Kind::BlockIID:
            if (block < 1 || grid.N % block != 0) {
                throw std::invalid_argument("FieldModel: block must divide N");
            }
            break;
    }
}

std::string FieldModel::label() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::Gaussian:
            out << "gaussian{" << cov.label() << "}";
            break;
        case Kind::Boolean:
            out << "boolean{lambda=" << fmt(intensity) << "," << radius.label() << "}";
            break;
        case Kind::BlockIID:
            out << "block{" << block << "," << law.label() << "}";
            break;
    }
    out << "[d=" << grid.d << ",N=" << grid.N << ",h=" << fmt(grid.h) << "]";
    return out.str();
}

std::optional<double> FieldModel::analytic_mean() const {
    switch (kind) {
        case Kind::Gaussian:
            return 0.0;
        case Kind::BlockIID:
            return law.mean();
        case Kind::Boolean: {
            if (intensity == 0.0) return 0.0;
            double T = grid.side();
            if (grid.d == 1) {
                double volume;
                if (radius.kind == RadiusLaw::Kind::Fixed) {
                    volume = std::min(2.0 * radius.r, T);
                } else {
                    // E[min(2r, T)] under the Pareto tail law.
                    double t0 = 0.5 * T;
                    double r0 = radius.r0;
                    double a = radius.a;
                    if (r0 >= t0) {
                        volume = T;
                    } else {
                        volume = 2.0 * (a / (a - 1.0)) *
                                     (r0 - std::pow(r0, a) * std::pow(t0, 1.0 - a)) +
                                 T * std::pow(r0 / t0, a);
                    }
                }
                return 1.0 - std::exp(-intensity * volume);
            }
            if (radius.kind == RadiusLaw::Kind::Fixed && 2.0 * radius.r < T) {
                double volume = unit_ball_volume(grid.d) * std::pow(radius.r, grid.d);
                return 1.0 - std::exp(-intensity * volume);
            }
            return std::nullopt;  // torus ball volume has no closed form here
        }
    }
    return std::nullopt;
}

namespace {

// Number of image shells to include in the wrapped covariance. Shells stop
// contributing once the first omitted one is below ~1e-13 * sigma2. Algebraic
// tails never reach that at a practical shell count (and diverge outright for
// gamma <= d), so the torus model for them is the minimal image alone.
int image_shells(const CovarianceModel& cov, const GridSpec& grid) {
    if (cov.kind != CovKind::Exponential) return 0;
    double side = grid.side();
    int included = 0;
    for (int K = 1; K <= 64; ++K) {
        double count = std::pow(2.0 * K + 1.0, grid.d) - std::pow(2.0 * K - 1.0, grid.d);
        double dmin = std::max((K - 0.9) * side, 0.0);
        double contrib = count * cov.eval(dmin);
        if (contrib < 1e-13 * cov.sigma2) break;
        included = K;
    }
    return included;
}

}  // namespace

double wrapped_covariance(const CovarianceModel& cov, const GridSpec& grid,
                          const std::array<int, 3>& offset) {
    if (cov.kind == CovKind::DeltaLag) {
        for (int axis = 0; axis < grid.d; ++axis) {
            if (grid.min_image(offset[axis]) != 0) return 0.0;
        }
        return cov.sigma2;
    }
    std::array<double, 3> base{0.0, 0.0, 0.0};
    for (int axis = 0; axis < grid.d; ++axis) {
        base[axis] = grid.min_image(offset[axis]) * grid.h;
    }
    int K = image_shells(cov, grid);
    double side = grid.side();
    KahanSum total;
    std::array<int, 3> k{0, 0, 0};
    int k_lo = -K;
    int k_hi = K;
    for (k[0] = (grid.d > 0 ? k_lo : 0); k[0] <= (grid.d > 0 ? k_hi : 0); ++k[0]) {
        for (k[1] = (grid.d > 1 ? k_lo : 0); k[1] <= (grid.d > 1 ? k_hi : 0); ++k[1]) {
            for (k[2] = (grid.d > 2 ? k_lo : 0); k[2] <= (grid.d > 2 ? k_hi : 0); ++k[2]) {
                double s = 0.0;
                for (int axis = 0; axis < grid.d; ++axis) {
                    double x = base[axis] + k[axis] * side;
                    s += x * x;
                }
                total.add(cov.eval(std::sqrt(s)));
            }
        }
    }
    return total.value();
}

std::vector<double> wrapped_covariance_array(const CovarianceModel& cov, const GridSpec& grid) {
    grid.validate();
    cov.validate();
    std::int64_t total = grid.cells();
    std::vector<double> c(total);
    for (std::int64_t i = 0; i < total; ++i) {
        c[i] = wrapped_covariance(cov, grid, grid.decode(i));
    }
    return c;
}

std::vector<double> spectral_coefficients(const CovarianceModel& cov, const GridSpec& grid) {
    std::vector<double> c = wrapped_covariance_array(cov, grid);
    std::int64_t total = grid.cells();
    std::vector<std::complex<double>> buf(total);
    for (std::int64_t i = 0; i < total; ++i) buf[i] = c[i];
    std::vector<int> dims(grid.d, grid.N);
    detail::fft_nd(buf.data(), dims, -1);
    std::vector<double> s(total);
    double scale = 1.0 / static_cast<double>(total);
    double tolerance = -1e-10 * cov.sigma2;
    for (std::int64_t i = 0; i < total; ++i) {
        double v = buf[i].real() * scale;
        if (v < tolerance) {
            auto m = grid.decode(i);
            std::ostringstream msg;
            msg << "spectral coefficient " << v << " below tolerance at mode (";
            for (int axis = 0; axis < grid.d; ++axis) {
                msg << (axis ? "," : "") << m[axis];
            }
            msg << ") for " << cov.label();
            throw SynthesisError(msg.str());
        }
        s[i] = std::max(v, 0.0);
    }
    return s;
}

namespace {

// sqrt of the clipped spectrum, cached per (covariance, grid): replicated
// sampling pays one covariance transform per model, not per draw.
std::shared_ptr<const std::vector<double>> sqrt_spectrum(const CovarianceModel& cov,
                                                         const GridSpec& grid) {
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const std::vector<double>>> cache;
    std::string key = cov.label() + "|" + std::to_string(grid.d) + "/" +
                      std::to_string(grid.N) + "/" + fmt(grid.h);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto s = spectral_coefficients(cov, grid);
    auto result = std::make_shared<std::vector<double>>(std::move(s));
    for (double& v : *result) v = std::sqrt(v);
    std::lock_guard<std::mutex> lock(mutex);
    auto [it, inserted] = cache.emplace(key, std::move(result));
    return it->second;
}

}  // namespace

FieldSample sample_gaussian(const GridSpec& grid, const CovarianceModel& cov,
                            std::uint64_t seed) {
    grid.validate();
    cov.validate();
    auto spec = sqrt_spectrum(cov, grid);
    std::int64_t total = grid.cells();
    std::vector<std::complex<double>> w(total);
    Philox rng(seed, 0);
    for (std::int64_t i = 0; i < total; ++i) {
        double re = rng.next_normal();
        double im = rng.next_normal();
        w[i] = (*spec)[i] * std::complex<double>(re, im);
    }
    std::vector<int> dims(grid.d, grid.N);
    detail::fft_nd(w.data(), dims, +1);
    FieldSample sample;
    sample.grid = grid;
    sample.values.resize(total);
    for (std::int64_t i = 0; i < total; ++i) sample.values[i] = w[i].real();
    sample.model_tag = "gaussian{" + cov.label() + "}";
    sample.seed = seed;
    return sample;
}

namespace {

struct BallPoint {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;
};

// Poisson count via unit-rate arrival times on stream 0; point i draws its
// center and radius from stream i+1. Under a shared seed the point set for a
// smaller intensity is a prefix of the one for a larger intensity.
std::vector<BallPoint> boolean_points(const GridSpec& grid, double intensity,
                                      const RadiusLaw& radius, std::uint64_t seed) {
    std::vector<BallPoint> points;
    double budget = intensity;
    for (int axis = 0; axis < grid.d; ++axis) budget *= grid.side();
    Philox arrivals(seed, 0);
    double t = arrivals.next_exponential();
    std::uint64_t i = 0;
    while (t <= budget) {
        Philox attr(seed, i + 1);
        BallPoint p;
        for (int axis = 0; axis < grid.d; ++axis) {
            p.center[axis] = attr.next_double() * grid.side();
        }
        if (radius.kind == RadiusLaw::Kind::Fixed) {
            p.radius = radius.r;
        } else {
            p.radius = radius.r0 * std::pow(attr.next_double_pos(), -1.0 / radius.a);
        }
        points.push_back(p);
        t += arrivals.next_exponential();
        ++i;
    }
    return points;
}

double torus_axis_distance(double x, double side) {
    double v = std::fmod(std::abs(x), side);
    return std::min(v, side - v);
}

double torus_point_distance(const GridSpec& grid, const std::array<double, 3>& a,
                            const std::array<double, 3>& b) {
    double s = 0.0;
    for (int axis = 0; axis < grid.d; ++axis) {
        double v = torus_axis_distance(a[axis] - b[axis], grid.side());
        s += v * v;
    }
    return std::sqrt(s);
}

void rasterize_ball(const GridSpec& grid, const BallPoint& p, std::vector<double>& values) {
    double side = grid.side();
    std::array<std::int64_t, 3> lo{0, 0, 0};
    std::array<std::int64_t, 3> count{1, 1, 1};
    for (int axis = 0; axis < grid.d; ++axis) {
        auto first = static_cast<std::int64_t>(std::floor((p.center[axis] - p.radius) / grid.h));
        auto last = static_cast<std::int64_t>(std::ceil((p.center[axis] + p.radius) / grid.h));
        lo[axis] = first;
        count[axis] = std::min<std::int64_t>(last - first + 1, grid.N);
    }
    std::array<std::int64_t, 3> it{0, 0, 0};
    std::array<double, 3> cell{0.0, 0.0, 0.0};
    for (it[0] = 0; it[0] < count[0]; ++it[0]) {
        for (it[1] = 0; it[1] < count[1]; ++it[1]) {
            for (it[2] = 0; it[2] < count[2]; ++it[2]) {
                std::array<int, 3> idx{0, 0, 0};
                bool inside = true;
                double s = 0.0;
                for (int axis = 0; axis < grid.d; ++axis) {
                    std::int64_t raw = lo[axis] + it[axis];
                    std::int64_t wrapped = ((raw % grid.N) + grid.N) % grid.N;
                    idx[axis] = static_cast<int>(wrapped);
                    cell[axis] = raw * grid.h;
                    double v = torus_axis_distance(cell[axis] - p.center[axis], side);
                    s += v * v;
                    if (s > p.radius * p.radius) {
                        inside = false;
                        break;
                    }
                }
                if (inside && s <= p.radius * p.radius) {
                    values[grid.encode(idx)] = 1.0;
                }
            }
        }
    }
}

}  // namespace

FieldSample sample_boolean(const GridSpec& grid, double intensity, const RadiusLaw& radius,
                           std::uint64_t seed) {
    grid.validate();
    if (intensity < 0.0) throw std::invalid_argument("sample_boolean: intensity must be nonnegative");
    if (radius.kind == RadiusLaw::Kind::ParetoTail && !(radius.a > grid.d)) {
        throw std::invalid_argument("sample_boolean: ParetoTail requires a > d");
    }
    FieldSample sample;
    sample.grid = grid;
    sample.values.assign(grid.cells(), 0.0);
    for (const auto& p : boolean_points(grid, intensity, radius, seed)) {
        rasterize_ball(grid, p, sample.values);
    }
    sample.model_tag = "boolean{lambda=" + fmt(intensity) + "," + radius.label() + "}";
    sample.seed = seed;
    return sample;
}

FieldSample sample_block_iid(const GridSpec& grid, int block, const BlockLaw& law,
                             std::uint64_t seed) {
    grid.validate();
    if (block < 1 || grid.N % block != 0) {
        throw std::invalid_argument("sample_block_iid: block must divide N");
    }
    int blocks_per_side = grid.N / block;
    std::int64_t block_total = 1;
    for (int axis = 0; axis < grid.d; ++axis) block_total *= blocks_per_side;
    std::vector<double> draws(block_total);
    Philox rng(seed, 0);
    for (std::int64_t b = 0; b < block_total; ++b) {
        if (law.kind == BlockLaw::Kind::Bernoulli) {
            draws[b] = rng.next_double() < law.p ? 1.0 : 0.0;
        } else {
            draws[b] = 2.0 * rng.next_double() - 1.0;
        }
    }
    FieldSample sample;
    sample.grid = grid;
    sample.values.resize(grid.cells());
    std::int64_t total = grid.cells();
    for (std::int64_t i = 0; i < total; ++i) {
        auto c = grid.decode(i);
        std::int64_t b = 0;
        for (int axis = 0; axis < grid.d; ++axis) {
            b = b * blocks_per_side + c[axis] / block;
        }
        sample.values[i] = draws[b];
    }
    sample.model_tag = "block{" + std::to_string(block) + "," + law.label() + "}";
    sample.seed = seed;
    return sample;
}

FieldSample sample_field(const FieldModel& model, std::uint64_t seed) {
    model.validate();
    switch (model.kind) {
        case FieldModel::Kind::Gaussian:
            return sample_gaussian(model.grid, model.cov, seed);
        case FieldModel::Kind::Boolean:
            return sample_boolean(model.grid, model.intensity, model.radius, seed);
        case FieldModel::Kind::BlockIID:
            return sample_block_iid(model.grid, model.block, model.law, seed);
    }
    throw std::logic_error("sample_field: unreachable");
}

bool supports_exterior_resampling(const FieldModel& model) {
    switch (model.kind) {
        case FieldModel::Kind::BlockIID:
        case FieldModel::Kind::Boolean:
            return true;
        case FieldModel::Kind::Gaussian:
            return model.cov.kind == CovKind::DeltaLag;
    }
    return false;
}

FieldSample resample_exterior(const FieldModel& model, const FieldSample& sample, double ell,
                              std::uint64_t resample_seed) {
    model.validate();
    if (ell < 0.0) throw std::invalid_argument("resample_exterior: ell must be nonnegative");
    if (!supports_exterior_resampling(model)) {
        throw std::runtime_error("resample_exterior: unsupported model " + model.label());
    }
    const GridSpec& grid = model.grid;
    std::int64_t total = grid.cells();
    FieldSample out = sample;
    out.seed = resample_seed;

    if (model.kind == FieldModel::Kind::Gaussian) {
        // White-noise field: cells at distance >= ell are independent draws.
        double sigma = std::sqrt(model.cov.sigma2);
        Philox rng(resample_seed, 0);
        for (std::int64_t i = 0; i < total; ++i) {
            if (grid.offset_distance(grid.decode(i)) >= ell) {
                out.values[i] = sigma * rng.next_normal();
            }
        }
        return out;
    }

    if (model.kind == FieldModel::Kind::BlockIID) {
        int blocks_per_side = grid.N / model.block;
        std::int64_t block_total = 1;
        for (int axis = 0; axis < grid.d; ++axis) block_total *= blocks_per_side;
        // A block is redrawn whenever any of its cells lies in the exterior.
        std::vector<char> touches(block_total, 0);
        for (std::int64_t i = 0; i < total; ++i) {
            if (grid.offset_distance(grid.decode(i)) >= ell) {
                auto c = grid.decode(i);
                std::int64_t b = 0;
                for (int axis = 0; axis < grid.d; ++axis) {
                    b = b * blocks_per_side + c[axis] / model.block;
                }
                touches[b] = 1;
            }
        }
        std::vector<double> fresh(block_total);
        Philox rng(resample_seed, 0);
        for (std::int64_t b = 0; b < block_total; ++b) {
            if (model.law.kind == BlockLaw::Kind::Bernoulli) {
                fresh[b] = rng.next_double() < model.law.p ? 1.0 : 0.0;
            } else {
                fresh[b] = 2.0 * rng.next_double() - 1.0;
            }
        }
        for (std::int64_t i = 0; i < total; ++i) {
            auto c = grid.decode(i);
            std::int64_t b = 0;
            for (int axis = 0; axis < grid.d; ++axis) {
                b = b * blocks_per_side + c[axis] / model.block;
            }
            if (touches[b]) out.values[i] = fresh[b];
        }
        return out;
    }

    // Boolean: keep points with centers inside B_ell, refresh the rest by an
    // independent Poisson process restricted to the exterior.
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    auto original = boolean_points(grid, model.intensity, model.radius, sample.seed);
    auto fresh = boolean_points(grid, model.intensity, model.radius, resample_seed);
    out.values.assign(total, 0.0);
    for (const auto& p : original) {
        if (torus_point_distance(grid, p.center, origin) < ell) {
            rasterize_ball(grid, p, out.values);
        }
    }
    for (const auto& p : fresh) {
        if (torus_point_distance(grid, p.center, origin) >= ell) {
            rasterize_ball(grid, p, out.values);
        }
    }
    return out;
}

}  // namespace msfi::fieldgen
