#include "msfi/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace msfi::config {

namespace {

using nlohmann::json;

[[noreturn]] void missing(const std::string& field) {
    throw ConfigError(field, "missing required field: " + field);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) missing(path.empty() ? key : path + "." + key);
    return *it;
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double as_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "field must be a number: " + field);
    return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field, "field must be an integer: " + field);
    return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "field must be a string: " + field);
    return j.get<std::string>();
}

void reject_unknown(const json& j, const std::vector<std::string>& known,
                    const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw ConfigError(join(path, it.key()), "unknown field: " + join(path, it.key()));
        }
    }
}

fieldgen::GridSpec grid_from_json(const json& j, const std::string& path) {
    reject_unknown(j, {"d", "N", "h"}, path);
    fieldgen::GridSpec grid;
    grid.d = static_cast<int>(as_integer(require(j, "d", path), join(path, "d")));
    grid.N = static_cast<int>(as_integer(require(j, "N", path), join(path, "N")));
    grid.h = as_number(require(j, "h", path), join(path, "h"));
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return grid;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::VarianceScan: return "VarianceScan";
        case ExperimentKind::TailScan: return "TailScan";
        case ExperimentKind::MixingScan: return "MixingScan";
        case ExperimentKind::CovarianceScan: return "CovarianceScan";
        case ExperimentKind::MomentScan: return "MomentScan";
        case ExperimentKind::ErgodicScan: return "ErgodicScan";
        case ExperimentKind::OracleCheck: return "OracleCheck";
    }
    return "?";
}

ExperimentKind experiment_from_string(const std::string& name) {
    if (name == "VarianceScan") return ExperimentKind::VarianceScan;
    if (name == "TailScan") return ExperimentKind::TailScan;
    if (name == "MixingScan") return ExperimentKind::MixingScan;
    if (name == "CovarianceScan") return ExperimentKind::CovarianceScan;
    if (name == "MomentScan") return ExperimentKind::MomentScan;
    if (name == "ErgodicScan") return ExperimentKind::ErgodicScan;
    if (name == "OracleCheck") return ExperimentKind::OracleCheck;
    throw ConfigError("experiment", "unknown experiment: " + name);
}

fieldgen::FieldModel model_from_json(const json& j, const std::string& path) {
    std::string kind = as_string(require(j, "kind", path), join(path, "kind"));
    auto grid = grid_from_json(require(j, "grid", path), join(path, "grid"));
    try {
        if (kind == "gaussian") {
            reject_unknown(j, {"kind", "grid", "cov"}, path);
            const json& cj = require(j, "cov", path);
            std::string cov_path = join(path, "cov");
            reject_unknown(cj, {"kind", "sigma2", "rho", "gamma"}, cov_path);
            std::string ck = as_string(require(cj, "kind", cov_path), join(cov_path, "kind"));
            double sigma2 = as_number(require(cj, "sigma2", cov_path), join(cov_path, "sigma2"));
            if (ck == "delta") {
                return fieldgen::FieldModel::gaussian(grid,
                                                      fieldgen::CovarianceModel::delta_lag(sigma2));
            }
            if (ck == "exponential") {
                double rho = as_number(require(cj, "rho", cov_path), join(cov_path, "rho"));
                return fieldgen::FieldModel::gaussian(
                    grid, fieldgen::CovarianceModel::exponential(sigma2, rho));
            }
            if (ck == "algebraic") {
                double gamma = as_number(require(cj, "gamma", cov_path), join(cov_path, "gamma"));
                return fieldgen::FieldModel::gaussian(
                    grid, fieldgen::CovarianceModel::algebraic_decay(sigma2, gamma));
            }
            throw ConfigError(join(cov_path, "kind"), "unknown covariance kind: " + ck);
        }
        if (kind == "boolean") {
            reject_unknown(j, {"kind", "grid", "intensity", "radius"}, path);
            double intensity =
                as_number(require(j, "intensity", path), join(path, "intensity"));
            const json& rj = require(j, "radius", path);
            std::string rpath = join(path, "radius");
            reject_unknown(rj, {"kind", "r", "r0", "a"}, rpath);
            std::string rk = as_string(require(rj, "kind", rpath), join(rpath, "kind"));
            fieldgen::RadiusLaw law;
            if (rk == "fixed") {
                law = fieldgen::RadiusLaw::fixed(
                    as_number(require(rj, "r", rpath), join(rpath, "r")));
            } else if (rk == "pareto") {
                law = fieldgen::RadiusLaw::pareto_tail(
                    as_number(require(rj, "r0", rpath), join(rpath, "r0")),
                    as_number(require(rj, "a", rpath), join(rpath, "a")));
            } else {
                throw ConfigError(join(rpath, "kind"), "unknown radius kind: " + rk);
            }
            return fieldgen::FieldModel::boolean(grid, intensity, law);
        }
        if (kind == "block_iid") {
            reject_unknown(j, {"kind", "grid", "block", "law"}, path);
            int block =
                static_cast<int>(as_integer(require(j, "block", path), join(path, "block")));
            const json& lj = require(j, "law", path);
            std::string lpath = join(path, "law");
            reject_unknown(lj, {"kind", "p"}, lpath);
            std::string lk = as_string(require(lj, "kind", lpath), join(lpath, "kind"));
            fieldgen::BlockLaw law;
            if (lk == "bernoulli") {
                law = fieldgen::BlockLaw::bernoulli(
                    as_number(require(lj, "p", lpath), join(lpath, "p")));
            } else if (lk == "uniform_pm1") {
                law = fieldgen::BlockLaw::uniform_pm1();
            } else {
                throw ConfigError(join(lpath, "kind"), "unknown cell law: " + lk);
            }
            return fieldgen::FieldModel::block_iid(grid, block, law);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(join(path, "kind"), "unknown model kind: " + kind);
}

json model_to_json(const fieldgen::FieldModel& model) {
    json j;
    j["grid"] = {{"d", model.grid.d}, {"N", model.grid.N}, {"h", model.grid.h}};
    switch (model.kind) {
        case fieldgen::FieldModel::Kind::Gaussian: {
            j["kind"] = "gaussian";
            json c;
            c["sigma2"] = model.cov.sigma2;
            switch (model.cov.kind) {
                case fieldgen::CovKind::DeltaLag:
                    c["kind"] = "delta";
                    break;
                case fieldgen::CovKind::Exponential:
                    c["kind"] = "exponential";
                    c["rho"] = model.cov.rho;
                    break;
                case fieldgen::CovKind::AlgebraicDecay:
                    c["kind"] = "algebraic";
                    c["gamma"] = model.cov.gamma;
                    break;
            }
            j["cov"] = c;
            break;
        }
        case fieldgen::FieldModel::Kind::Boolean: {
            j["kind"] = "boolean";
            j["intensity"] = model.intensity;
            if (model.radius.kind == fieldgen::RadiusLaw::Kind::Fixed) {
                j["radius"] = {{"kind", "fixed"}, {"r", model.radius.r}};
            } else {
                j["radius"] = {{"kind", "pareto"}, {"r0", model.radius.r0}, {"a", model.radius.a}};
            }
            break;
        }
        case fieldgen::FieldModel::Kind::BlockIID: {
            j["kind"] = "block_iid";
            j["block"] = model.block;
            if (model.law.kind == fieldgen::BlockLaw::Kind::Bernoulli) {
                j["law"] = {{"kind", "bernoulli"}, {"p", model.law.p}};
            } else {
                j["law"] = {{"kind", "uniform_pm1"}};
            }
            break;
        }
    }
    return j;
}

functionals::LocalFunctional functional_from_json(const json& j, const std::string& path) {
    reject_unknown(j, {"kind", "radius", "level"}, path);
    std::string kind = as_string(require(j, "kind", path), join(path, "kind"));
    try {
        if (kind == "cell_value") return functionals::LocalFunctional::cell_value();
        if (kind == "ball_average") {
            return functionals::LocalFunctional::ball_average(
                as_number(require(j, "radius", path), join(path, "radius")));
        }
        if (kind == "threshold") {
            return functionals::LocalFunctional::threshold(
                as_number(require(j, "radius", path), join(path, "radius")),
                as_number(require(j, "level", path), join(path, "level")));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(join(path, "kind"), "unknown functional kind: " + kind);
}

json functional_to_json(const functionals::LocalFunctional& f) {
    json j;
    switch (f.kind) {
        case functionals::LocalFunctional::Kind::CellValue:
            j["kind"] = "cell_value";
            break;
        case functionals::LocalFunctional::Kind::BallAverage:
            j["kind"] = "ball_average";
            j["radius"] = f.radius;
            break;
        case functionals::LocalFunctional::Kind::Threshold:
            j["kind"] = "threshold";
            j["radius"] = f.radius;
            j["level"] = f.level;
            break;
    }
    return j;
}

weights::WeightFamily weight_from_json(const json& j, const std::string& path) {
    reject_unknown(j, {"kind", "beta", "c", "R", "normalization"}, path);
    std::string kind = as_string(require(j, "kind", path), join(path, "kind"));
    double norm = 1.0;
    if (j.contains("normalization")) {
        norm = as_number(j["normalization"], join(path, "normalization"));
    }
    try {
        if (kind == "algebraic") {
            return weights::WeightFamily::algebraic(
                as_number(require(j, "beta", path), join(path, "beta")), norm);
        }
        if (kind == "stretched_exp") {
            return weights::WeightFamily::stretched_exp(
                as_number(require(j, "beta", path), join(path, "beta")),
                as_number(require(j, "c", path), join(path, "c")), norm);
        }
        if (kind == "compact") {
            return weights::WeightFamily::compact(
                as_number(require(j, "R", path), join(path, "R")), norm);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(join(path, "kind"), "unknown weight kind: " + kind);
}

json weight_to_json(const weights::WeightFamily& w) {
    json j;
    switch (w.kind) {
        case weights::WeightKind::Algebraic:
            j["kind"] = "algebraic";
            j["beta"] = w.beta;
            break;
        case weights::WeightKind::StretchedExp:
            j["kind"] = "stretched_exp";
            j["beta"] = w.beta;
            j["c"] = w.c;
            break;
        case weights::WeightKind::Compact:
            j["kind"] = "compact";
            j["R"] = w.R;
            break;
    }
    j["normalization"] = w.normalization;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    reject_unknown(j,
                   {"experiment", "model", "functional", "average", "weight", "sweep",
                    "replicates", "seed", "output_dir", "L", "D", "region_size",
                    "region_offset", "levels", "regime"},
                   "");
    ExperimentConfig cfg;
    cfg.experiment =
        experiment_from_string(as_string(require(j, "experiment", ""), "experiment"));
    if (j.contains("model")) cfg.model = model_from_json(j["model"], "model");
    if (j.contains("functional")) {
        cfg.functional = functional_from_json(j["functional"], "functional");
    }
    if (j.contains("average")) {
        std::string avg = as_string(j["average"], "average");
        if (avg == "box") {
            cfg.average = functionals::AverageKind::Box;
        } else if (avg == "exp") {
            cfg.average = functionals::AverageKind::ExpKernel;
        } else {
            throw ConfigError("average", "average must be \"box\" or \"exp\"");
        }
    }
    if (j.contains("weight")) cfg.weight = weight_from_json(j["weight"], "weight");
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        if (!s.is_array()) throw ConfigError("sweep", "sweep must be an array");
        for (std::size_t i = 0; i < s.size(); ++i) {
            const json& entry = s[i];
            std::string entry_path = "sweep[" + std::to_string(i) + "]";
            if (entry.is_array()) {
                if (entry.size() != 2) {
                    throw ConfigError(entry_path, "sweep pairs must have two entries");
                }
                cfg.sweep_pairs.emplace_back(as_number(entry[0], entry_path),
                                             as_number(entry[1], entry_path));
            } else {
                cfg.sweep.push_back(as_number(entry, entry_path));
            }
        }
        if (!cfg.sweep.empty() && !cfg.sweep_pairs.empty()) {
            throw ConfigError("sweep", "sweep must not mix scalars and pairs");
        }
    }
    cfg.replicates = as_integer(require(j, "replicates", ""), "replicates");
    cfg.seed = static_cast<std::uint64_t>(as_integer(require(j, "seed", ""), "seed"));
    cfg.output_dir = as_string(require(j, "output_dir", ""), "output_dir");
    if (j.contains("L")) cfg.L = as_number(j["L"], "L");
    if (j.contains("D")) cfg.D = as_number(j["D"], "D");
    if (j.contains("region_size")) cfg.region_size = as_number(j["region_size"], "region_size");
    if (j.contains("region_offset")) {
        cfg.region_offset = as_integer(j["region_offset"], "region_offset");
    }
    if (j.contains("levels")) {
        const json& lv = j["levels"];
        if (!lv.is_array()) throw ConfigError("levels", "levels must be an array");
        for (std::size_t i = 0; i < lv.size(); ++i) {
            cfg.levels.push_back(as_number(lv[i], "levels[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("regime")) cfg.regime = as_string(j["regime"], "regime");
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::validate() const {
    bool needs_model = experiment != ExperimentKind::OracleCheck;
    bool needs_functional =
        experiment == ExperimentKind::VarianceScan || experiment == ExperimentKind::TailScan ||
        experiment == ExperimentKind::MomentScan || experiment == ExperimentKind::ErgodicScan;
    if (needs_model && !model) missing("model");
    if (needs_functional && !functional) missing("functional");
    if (output_dir.empty()) throw ConfigError("output_dir", "output_dir must be nonempty");

    std::int64_t floor = 2;
    if (experiment == ExperimentKind::VarianceScan) floor = 100;
    if (experiment == ExperimentKind::TailScan || experiment == ExperimentKind::MomentScan) {
        floor = 1000;
    }
    if (experiment == ExperimentKind::OracleCheck) floor = 0;
    if (replicates < floor) {
        throw ConfigError("replicates", "replicates must be at least " + std::to_string(floor) +
                                            " for " + experiment_name(experiment));
    }

    if (experiment != ExperimentKind::OracleCheck) {
        if (sweep.empty() && sweep_pairs.empty()) missing("sweep");
        for (std::size_t i = 1; i < sweep.size(); ++i) {
            if (!(sweep[i] > sweep[i - 1])) {
                throw ConfigError("sweep", "sweep must be strictly increasing");
            }
        }
        for (std::size_t i = 1; i < sweep_pairs.size(); ++i) {
            if (sweep_pairs[i] <= sweep_pairs[i - 1]) {
                throw ConfigError("sweep", "sweep pairs must be strictly increasing");
            }
        }
    }

    if (experiment == ExperimentKind::TailScan && !sweep.empty() && !(L > 0.0)) {
        throw ConfigError("L", "TailScan with a scalar delta sweep requires L > 0");
    }
    if (experiment == ExperimentKind::MomentScan) {
        if (!(L > 0.0)) throw ConfigError("L", "MomentScan requires L > 0");
        bool has_p1 = false;
        for (double p : sweep) {
            double rounded = std::round(p);
            if (std::abs(p - rounded) > 1e-12 || rounded < 1 || rounded > 6) {
                throw ConfigError("sweep", "MomentScan sweep entries must be integers in [1, 6]");
            }
            if (rounded == 1) has_p1 = true;
        }
        if (!has_p1) {
            throw ConfigError("sweep", "MomentScan sweep must include p = 1 (moment base)");
        }
    }
    if (experiment == ExperimentKind::MixingScan) {
        if (levels.empty()) missing("levels");
        if (!(region_size > 0.0)) {
            throw ConfigError("region_size", "region_size must be positive");
        }
    }
    if (!regime.empty() && experiment != ExperimentKind::TailScan) {
        throw ConfigError("regime", "regime is only meaningful for TailScan");
    }
}

json ExperimentConfig::to_canonical_json() const {
    json j;
    j["experiment"] = experiment_name(experiment);
    if (model) j["model"] = model_to_json(*model);
    if (functional) j["functional"] = functional_to_json(*functional);
    j["average"] = average == functionals::AverageKind::Box ? "box" : "exp";
    if (weight) j["weight"] = weight_to_json(*weight);
    if (!sweep.empty()) j["sweep"] = sweep;
    if (!sweep_pairs.empty()) {
        json arr = json::array();
        for (const auto& [a, b] : sweep_pairs) arr.push_back(json::array({a, b}));
        j["sweep"] = arr;
    }
    j["replicates"] = replicates;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    if (L != 0.0) j["L"] = L;
    if (std::isfinite(D)) j["D"] = D;
    if (experiment == ExperimentKind::MixingScan) {
        j["region_size"] = region_size;
        j["region_offset"] = region_offset;
        j["levels"] = levels;
    }
    if (!regime.empty()) j["regime"] = regime;
    return j;
}

std::string ExperimentConfig::hash() const { return sha256_hex(to_canonical_json().dump()); }

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace msfi::config
