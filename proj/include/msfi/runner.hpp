#pragma once

#include "msfi/bounds.hpp"
#include "msfi/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace msfi::runner {

inline constexpr const char* kToolVersion = "msfi 0.1.0";

/// One sweep point. param holds the swept coordinate ("L", "delta|L", "R",
/// "lag", "p", "check"); pairs carry both components.
struct ReportRow {
    std::string experiment;
    std::string model_tag;
    std::string functional;
    std::string avg_kind;
    std::string param_name;
    std::string param_value_str;
    double param_value = 0.0;
    double param_value2 = 0.0;  // second pair component, NaN otherwise
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::string flags;
};

struct Verdict {
    std::string regime;
    std::string params;
    double C_fit = 0.0;
    bool dominated = false;
    double margin = 0.0;
    std::string worst_point;
    std::int64_t n_points = 0;
};

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;  // natural log
    double residual = 0.0;   // max |log y - fit|
};

struct Report {
    std::vector<ReportRow> rows;
    std::vector<Verdict> verdicts;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version;
    double wall_time_s = 0.0;
    std::optional<ScalingFit> scaling;
    int failed_checks = 0;  // OracleCheck failures

    bool all_verdicts_dominated() const;
};

/// Executes the sweep, writes results.csv, verdicts.csv and report.json
/// under output_dir, and returns the report. Deterministic given (config,
/// seed): two runs produce byte-identical results.csv.
Report run_experiment(const config::ExperimentConfig& cfg);

/// Ordinary least squares on (log x, log y); rejects nonpositive values.
/// Column names: "param_value", "param_value2", "value", "std_error".
ScalingFit fit_scaling(const std::vector<ReportRow>& rows, const std::string& x_col,
                       const std::string& y_col);

std::string results_csv(const Report& report);
std::string verdicts_csv(const Report& report);

struct OracleCheckResult {
    std::string name;
    double expected = 0.0;
    double computed = 0.0;
    bool pass = false;
};

/// The battery behind the OracleCheck experiment and the `oracle` CLI
/// subcommand: exact hand values plus 50 randomized product-law
/// spectral-gap checks.
std::vector<OracleCheckResult> oracle_battery();

}  // namespace msfi::runner
