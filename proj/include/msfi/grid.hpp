#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace msfi::fieldgen {

/// Periodic grid: dimension d, N cells per side, spacing h. Cell
/// (i_1,...,i_d) sits at physical coordinates (i_1 h, ..., i_d h) on the
/// torus of side N*h. N must be a power of two and N^d must stay below 2^24.
struct GridSpec {
    int d = 1;
    int N = 0;
    double h = 1.0;
    bool periodic = true;

    void validate() const;

    std::int64_t cells() const {
        std::int64_t n = 1;
        for (int axis = 0; axis < d; ++axis) n *= N;
        return n;
    }
    double side() const { return N * h; }
    double half_side() const { return 0.5 * N * h; }

    /// Signed minimal-image representative of a lattice offset along one
    /// axis, in (-N/2, N/2].
    int min_image(int m) const {
        int r = m % N;
        if (r < 0) r += N;
        if (r > N / 2) r -= N;
        return r;
    }

    /// Torus distance between two cells given their lattice offset.
    double offset_distance(const std::array<int, 3>& offset) const {
        double s = 0.0;
        for (int axis = 0; axis < d; ++axis) {
            double x = min_image(offset[axis]) * h;
            s += x * x;
        }
        return std::sqrt(s);
    }

    std::array<int, 3> decode(std::int64_t index) const {
        std::array<int, 3> c{0, 0, 0};
        for (int axis = d - 1; axis >= 0; --axis) {
            c[axis] = static_cast<int>(index % N);
            index /= N;
        }
        return c;
    }

    std::int64_t encode(const std::array<int, 3>& c) const {
        std::int64_t index = 0;
        for (int axis = 0; axis < d; ++axis) {
            int v = c[axis] % N;
            if (v < 0) v += N;
            index = index * N + v;
        }
        return index;
    }
};

/// One realization of a stationary field on a periodic grid, together with
/// the metadata that produced it. Regenerating with the same (model, grid,
/// seed) reproduces `values` bit-exactly.
struct FieldSample {
    GridSpec grid;
    std::vector<double> values;
    std::string model_tag;
    std::uint64_t seed = 0;
};

/// Flat binary dump: 16-byte header (magic "MSFI", u32 version, u32 d,
/// u32 N, all little-endian) followed by N^d little-endian IEEE doubles in
/// row-major order. The grid spacing is not part of the format.
void write_field(const FieldSample& sample, const std::string& path);
FieldSample read_field(const std::string& path, double h = 1.0);

}  // namespace msfi::fieldgen
