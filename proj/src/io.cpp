#include "msfi/grid.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace msfi::fieldgen {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double x) {
    std::uint64_t v{};
    std::memcpy(&v, &x, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x{};
    std::memcpy(&x, &v, 8);
    return x;
}

constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_field(const FieldSample& sample, const std::string& path) {
    sample.grid.validate();
    if (static_cast<std::int64_t>(sample.values.size()) != sample.grid.cells()) {
        throw std::invalid_argument("write_field: value count does not match the grid");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field: cannot open " + path);
    out.write("MSFI", 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(sample.grid.d));
    put_u32(out, static_cast<std::uint32_t>(sample.grid.N));
    for (double v : sample.values) put_f64(out, v);
    if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

FieldSample read_field(const std::string& path, double h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MSFI", 4) != 0) {
        throw std::runtime_error("read_field: bad magic in " + path);
    }
    std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw std::runtime_error("read_field: unsupported version in " + path);
    }
    FieldSample sample;
    sample.grid.d = static_cast<int>(get_u32(in));
    sample.grid.N = static_cast<int>(get_u32(in));
    sample.grid.h = h;
    sample.grid.validate();
    std::int64_t total = sample.grid.cells();
    sample.values.resize(total);
    for (std::int64_t i = 0; i < total; ++i) sample.values[i] = get_f64(in);
    if (!in) throw std::runtime_error("read_field: truncated file " + path);
    return sample;
}

}  // namespace msfi::fieldgen
