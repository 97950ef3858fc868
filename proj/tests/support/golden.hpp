#pragma once

// Access to the committed golden values for derived constants. Each entry
// was computed by the oracle named in its "oracle" field before being
// frozen here; tests recompute the oracle and compare both routes.

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

namespace msfi::testsupport {

struct GoldenEntry {
    std::string id;
    double value = 0.0;
    std::string oracle;
    double tolerance_rel = 0.0;
};

inline GoldenEntry golden(const std::string& id) {
    static nlohmann::json doc = [] {
        std::ifstream in(MSFI_GOLDEN_FILE);
        if (!in) throw std::runtime_error("cannot open golden file " MSFI_GOLDEN_FILE);
        nlohmann::json j;
        in >> j;
        return j;
    }();
    for (const auto& entry : doc.at("values")) {
        if (entry.at("id").get<std::string>() == id) {
            GoldenEntry out;
            out.id = id;
            out.value = entry.at("value").get<double>();
            out.oracle = entry.at("oracle").get<std::string>();
            out.tolerance_rel = entry.at("tolerance_rel").get<double>();
            return out;
        }
    }
    throw std::runtime_error("golden value not found: " + id);
}

}  // namespace msfi::testsupport
