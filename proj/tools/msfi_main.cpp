// Experiment runner and inspection tool for the msfi library.
//
// Subcommands:
//   msfi run <config.json> [--seed S] [--replicates N] [--out DIR] [--assert-verdicts]
//   msfi oracle
//   msfi bounds eval <regime> [key=value ...]
//   msfi weights table <family> [key=value ...]
//
// Exit codes: 0 success, 2 validation error, 3 verdict/check failure under
// --assert-verdicts.

#include "msfi/bounds.hpp"
#include "msfi/config.hpp"
#include "msfi/runner.hpp"
#include "msfi/weights.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

std::map<std::string, double> parse_kv(const std::vector<std::string>& args) {
    std::map<std::string, double> out;
    for (const auto& arg : args) {
        auto pos = arg.find('=');
        if (pos == std::string::npos) {
            throw msfi::config::ConfigError(arg, "expected key=value, got: " + arg);
        }
        out[arg.substr(0, pos)] = std::stod(arg.substr(pos + 1));
    }
    return out;
}

double take(std::map<std::string, double>& kv, const std::string& key, double fallback,
            bool required = false) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        if (required) throw msfi::config::ConfigError(key, "missing parameter: " + key);
        return fallback;
    }
    double v = it->second;
    kv.erase(it);
    return v;
}

msfi::weights::WeightFamily weight_from_kv(const std::string& family,
                                           std::map<std::string, double>& kv) {
    using msfi::weights::WeightFamily;
    double norm = take(kv, "normalization", 1.0);
    if (family == "algebraic") return WeightFamily::algebraic(take(kv, "beta", 0.0, true), norm);
    if (family == "stretched_exp") {
        return WeightFamily::stretched_exp(take(kv, "beta", 0.0, true), take(kv, "c", 0.0, true),
                                           norm);
    }
    if (family == "compact") return WeightFamily::compact(take(kv, "R", 0.0, true), norm);
    throw msfi::config::ConfigError("family", "unknown weight family: " + family);
}

int cmd_run(const std::string& path, std::optional<std::int64_t> seed,
            std::optional<std::int64_t> replicates, std::optional<std::string> out_dir,
            bool assert_verdicts) {
    auto cfg = msfi::config::ExperimentConfig::from_file(path);
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (replicates) cfg.replicates = *replicates;
    if (out_dir) cfg.output_dir = *out_dir;
    cfg.validate();
    auto report = msfi::runner::run_experiment(cfg);
    std::printf("%s: %zu rows, %zu verdicts, hash %.12s..., %.2fs -> %s\n",
                experiment_name(cfg.experiment).c_str(), report.rows.size(),
                report.verdicts.size(), report.config_hash.c_str(), report.wall_time_s,
                cfg.output_dir.c_str());
    if (report.scaling) {
        std::printf("  scaling: slope %.4f intercept %.4f residual %.4f\n",
                    report.scaling->slope, report.scaling->intercept, report.scaling->residual);
    }
    for (const auto& v : report.verdicts) {
        std::printf("  verdict %s [%s]: C_fit=%.6g dominated=%s margin=%.4f worst=%s\n",
                    v.regime.c_str(), v.params.c_str(), v.C_fit, v.dominated ? "yes" : "no",
                    v.margin, v.worst_point.c_str());
    }
    if (report.failed_checks > 0) {
        std::printf("  oracle checks failed: %d\n", report.failed_checks);
    }
    if (assert_verdicts && (!report.all_verdicts_dominated() || report.failed_checks > 0)) {
        return 3;
    }
    return 0;
}

int cmd_oracle() {
    auto results = msfi::runner::oracle_battery();
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%-38s expected %-12.10g computed %-12.10g [%s]\n", r.name.c_str(),
                    r.expected, r.computed, r.pass ? "ok" : "FAIL");
        if (!r.pass) ++failures;
    }
    std::printf("%zu checks, %d failures\n", results.size(), failures);
    return failures == 0 ? 0 : 1;
}

int cmd_bounds_eval(const std::string& regime_name, const std::vector<std::string>& kv_args) {
    using namespace msfi;
    auto kv = parse_kv(kv_args);
    auto kind = bounds::regime_from_string(regime_name);
    int d = static_cast<int>(take(kv, "d", 1.0));
    weights::DimensionContext ctx(d);

    double value = 0.0;
    switch (kind) {
        case bounds::Regime::VarMSG: {
            double C = take(kv, "C", 1.0);
            std::string family = kv.count("R") ? "compact"
                                 : kv.count("c") ? "stretched_exp"
                                                 : "algebraic";
            auto w = weight_from_kv(family, kv);
            value = C * bounds::predicted_variance(w, ctx, take(kv, "L", 0.0, true));
            break;
        }
        case bounds::Regime::CovDecay: {
            std::string family = kv.count("R") ? "compact"
                                 : kv.count("c") ? "stretched_exp"
                                                 : "algebraic";
            auto w = weight_from_kv(family, kv);
            value = bounds::predicted_covariance_decay(w, take(kv, "x_norm", 0.0, true),
                                                       take(kv, "C", 1.0));
            break;
        }
        case bounds::Regime::MixingDecay: {
            std::string family = kv.count("c") ? "stretched_exp" : "algebraic";
            double R = take(kv, "R", 0.0, true);
            double D = take(kv, "D", 0.0, true);
            auto w = weight_from_kv(family, kv);
            value = bounds::predicted_mixing(w, ctx, R, D, take(kv, "C", 1.0));
            break;
        }
        case bounds::Regime::PsiL:
            value = bounds::psi_l(take(kv, "u", 0.0, true), take(kv, "L", 0.0, true),
                                  take(kv, "C", 1.0));
            break;
        case bounds::Regime::PsiP0Alpha:
            value = bounds::psi_p0_alpha(take(kv, "u", 0.0, true), take(kv, "p0", 0.0, true),
                                         take(kv, "alpha", 0.0, true));
            break;
        case bounds::Regime::MomentSG:
        case bounds::Regime::MomentLSI:
            value = bounds::moment_growth_shape(kind, static_cast<int>(take(kv, "p", 1.0, true)),
                                                take(kv, "C", 1.0),
                                                take(kv, "base", 0.0, true));
            break;
        default: {
            bounds::BoundRegime regime;
            regime.kind = kind;
            regime.params["C"] = take(kv, "C", 1.0);
            regime.params["d"] = d;
            if (kv.count("beta")) regime.params["beta"] = kv["beta"];
            double beta = regime.params.count("beta") ? regime.params["beta"] : 1.0;
            auto w = kv.count("c")
                         ? msfi::weights::WeightFamily::stretched_exp(beta, kv["c"])
                         : msfi::weights::WeightFamily::algebraic(beta);
            kv.erase("beta");
            kv.erase("c");
            value = bounds::predicted_tail(regime, take(kv, "delta", 0.0, true),
                                           take(kv, "L", 0.0, true), w, ctx);
            break;
        }
    }
    std::printf("%.17g\n", value);
    return 0;
}

int cmd_weights_table(const std::string& family, const std::vector<std::string>& kv_args) {
    using namespace msfi;
    auto kv = parse_kv(kv_args);
    int d = static_cast<int>(take(kv, "d", 1.0));
    double ell_max = take(kv, "ell_max", 64.0);
    auto w = weight_from_kv(family, kv);
    weights::DimensionContext ctx(d);
    std::printf("# %s, d=%d\n", w.label().c_str(), d);
    std::printf("%-10s %-14s %-14s %-14s\n", "ell", "pi", "tail_integral", "pi_star");
    for (double ell = 0.0; ell <= ell_max; ell = ell == 0.0 ? 1.0 : ell * 2.0) {
        std::printf("%-10g %-14.8g %-14.8g %-14.8g\n", ell, weights::eval_weight(w, ell),
                    weights::tail_integral(w, ell), weights::pi_star(w, ctx, ell));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for stationary random fields"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::int64_t> seed_override;
    std::optional<std::int64_t> replicates_override;
    std::optional<std::string> out_override;
    bool assert_verdicts = false;
    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Experiment JSON file")->required();
    run->add_option("--seed", seed_override, "Override the master seed");
    run->add_option("--replicates", replicates_override, "Override the replicate count");
    run->add_option("--out", out_override, "Override the output directory");
    run->add_flag("--assert-verdicts", assert_verdicts,
                  "Exit 3 when any verdict fails to dominate");

    auto* oracle = app.add_subcommand("oracle", "Print the exact-oracle check tables");

    std::string regime_name;
    std::vector<std::string> bound_params;
    auto* bounds_cmd = app.add_subcommand("bounds", "Bound curve tools");
    auto* bounds_eval = bounds_cmd->add_subcommand("eval", "Evaluate a bound curve");
    bounds_eval->add_option("regime", regime_name, "Regime name (e.g. TailMLSIfct)")->required();
    bounds_eval->add_option("params", bound_params, "key=value parameters");

    std::string family;
    std::vector<std::string> weight_params;
    auto* weights_cmd = app.add_subcommand("weights", "Weight family tools");
    auto* weights_table = weights_cmd->add_subcommand("table", "Tabulate a weight family");
    weights_table->add_option("family", family, "algebraic | stretched_exp | compact")
        ->required();
    weights_table->add_option("params", weight_params, "key=value parameters");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, seed_override, replicates_override, out_override,
                           assert_verdicts);
        }
        if (oracle->parsed()) return cmd_oracle();
        if (bounds_cmd->parsed() && bounds_eval->parsed()) {
            return cmd_bounds_eval(regime_name, bound_params);
        }
        if (weights_cmd->parsed() && weights_table->parsed()) {
            return cmd_weights_table(family, weight_params);
        }
    } catch (const msfi::config::ConfigError& e) {
        std::cerr << "config error";
        if (!e.field.empty()) std::cerr << " [" << e.field << "]";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
