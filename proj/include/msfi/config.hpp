#pragma once

#include "msfi/estimators.hpp"
#include "msfi/fieldgen.hpp"
#include "msfi/functionals.hpp"
#include "msfi/weights.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msfi::config {

/// Validation failure that names the offending field.
struct ConfigError : std::runtime_error {
    std::string field;

    ConfigError(std::string field_, const std::string& message)
        : std::runtime_error(message), field(std::move(field_)) {}
};

enum class ExperimentKind {
    VarianceScan,
    TailScan,
    MixingScan,
    CovarianceScan,
    MomentScan,
    ErgodicScan,
    OracleCheck,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

/// One experiment: a flat, human-editable JSON file. Unknown keys are
/// rejected so that the canonical form (and its hash) is unambiguous.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::OracleCheck;
    std::optional<fieldgen::FieldModel> model;
    std::optional<functionals::LocalFunctional> functional;
    functionals::AverageKind average = functionals::AverageKind::Box;
    std::optional<weights::WeightFamily> weight;
    std::vector<double> sweep;                            // scalar sweeps
    std::vector<std::pair<double, double>> sweep_pairs;   // TailScan (delta, L)
    std::int64_t replicates = 0;
    std::uint64_t seed = 0;
    std::string output_dir;

    // Experiment-specific knobs.
    double L = 0.0;  // fixed scale for TailScan scalar sweeps and MomentScan
    double D = std::numeric_limits<double>::infinity();  // MixingScan diameter cap
    double region_size = 1.0;                            // MixingScan region side
    std::int64_t region_offset = 0;                      // MixingScan placement offset, cells
    std::vector<double> levels;                          // MixingScan event levels
    std::string regime;                                  // TailScan verdict regime

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);

    void validate() const;
    nlohmann::json to_canonical_json() const;
    /// SHA-256 of the canonical JSON serialization, hex-encoded.
    std::string hash() const;
};

nlohmann::json model_to_json(const fieldgen::FieldModel& model);
fieldgen::FieldModel model_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json functional_to_json(const functionals::LocalFunctional& f);
functionals::LocalFunctional functional_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json weight_to_json(const weights::WeightFamily& w);
weights::WeightFamily weight_from_json(const nlohmann::json& j, const std::string& path);

/// SHA-256 hex digest of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace msfi::config
