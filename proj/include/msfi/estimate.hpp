#pragma once

#include <cstdint>
#include <set>
#include <string>

namespace msfi {

/// A Monte Carlo estimate: value, standard error, replicate count and seed
/// provenance. Flags record anything the consumer should know about how the
/// number was produced ("pooled-mean", "kernel-truncation", ...).
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::set<std::string> flags;

    std::string flags_joined(char sep = ';') const {
        std::string out;
        for (const auto& f : flags) {
            if (!out.empty()) out += sep;
            out += f;
        }
        return out;
    }
};

}  // namespace msfi
