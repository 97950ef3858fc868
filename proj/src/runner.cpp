#include "msfi/runner.hpp"

#include "msfi/common.hpp"
#include "msfi/estimators.hpp"
#include "msfi/oracle.hpp"
#include "msfi/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace msfi::runner {

namespace {

using config::ExperimentConfig;
using config::ExperimentKind;

std::string fmt(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

double row_column(const ReportRow& row, const std::string& col) {
    if (col == "param_value") return row.param_value;
    if (col == "param_value2") return row.param_value2;
    if (col == "value") return row.value;
    if (col == "std_error") return row.std_error;
    throw std::invalid_argument("unknown report column: " + col);
}

ReportRow base_row(const ExperimentConfig& cfg) {
    ReportRow row;
    row.experiment = experiment_name(cfg.experiment);
    row.model_tag = cfg.model ? cfg.model->label() : "-";
    row.functional = cfg.functional ? cfg.functional->label() : "-";
    row.avg_kind = functionals::average_kind_label(cfg.average);
    row.seed = cfg.seed;
    row.param_value2 = std::numeric_limits<double>::quiet_NaN();
    return row;
}

void fill_estimate(ReportRow& row, const Estimate& est) {
    row.value = est.value;
    row.std_error = est.std_error;
    row.n = est.n;
    row.flags = est.flags_joined();
}

std::optional<ScalingFit> try_scaling(const std::vector<ReportRow>& rows) {
    if (rows.size() < 3) return std::nullopt;
    try {
        return fit_scaling(rows, "param_value", "value");
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

// Verdict helper: points with nonpositive targets are trivially dominated
// and excluded from the log-scale fit.
std::optional<Verdict> fit_verdict(const bounds::BoundRegime& regime,
                                   std::vector<bounds::FitPoint> points,
                                   const weights::WeightFamily* w,
                                   const weights::DimensionContext* ctx,
                                   const std::string& params_desc) {
    std::erase_if(points, [](const bounds::FitPoint& pt) {
        return !(pt.value + 3.0 * pt.std_error > 0.0);
    });
    if (points.empty()) return std::nullopt;
    auto fit = bounds::fit_constant(regime, points, w, ctx);
    Verdict v;
    v.regime = bounds::regime_name(regime.kind);
    v.params = params_desc;
    v.C_fit = fit.C_fit;
    v.dominated = fit.dominated;
    v.margin = fit.margin;
    v.worst_point = fit.worst_point;
    v.n_points = static_cast<std::int64_t>(points.size());
    return v;
}

void run_variance_scan(const ExperimentConfig& cfg, Report& report) {
    std::vector<bounds::FitPoint> points;
    for (double L : cfg.sweep) {
        auto est = estimators::variance_of_average(*cfg.model, *cfg.functional, cfg.average, L,
                                                   cfg.replicates, cfg.seed);
        ReportRow row = base_row(cfg);
        row.param_name = "L";
        row.param_value = L;
        row.param_value_str = fmt(L);
        fill_estimate(row, est);
        report.rows.push_back(row);
        bounds::FitPoint pt;
        pt.params["L"] = L;
        pt.value = est.value;
        pt.std_error = est.std_error;
        pt.id = "L=" + fmt(L);
        points.push_back(pt);
    }
    report.scaling = try_scaling(report.rows);
    if (cfg.weight) {
        weights::DimensionContext ctx(cfg.model->grid.d);
        bounds::BoundRegime regime;
        regime.kind = bounds::Regime::VarMSG;
        if (auto v = fit_verdict(regime, points, &*cfg.weight, &ctx, cfg.weight->label())) {
            report.verdicts.push_back(*v);
        }
    }
}

void run_tail_scan(const ExperimentConfig& cfg, Report& report) {
    std::vector<std::pair<double, double>> sweep = cfg.sweep_pairs;
    if (sweep.empty()) {
        for (double delta : cfg.sweep) sweep.emplace_back(delta, cfg.L);
    }
    std::vector<bounds::FitPoint> points;
    for (auto [delta, L] : sweep) {
        auto est = estimators::tail_probability(*cfg.model, *cfg.functional, cfg.average, L,
                                                delta, cfg.replicates, cfg.seed);
        ReportRow row = base_row(cfg);
        row.param_name = "delta|L";
        row.param_value = delta;
        row.param_value2 = L;
        row.param_value_str = fmt(delta) + "|" + fmt(L);
        fill_estimate(row, est);
        report.rows.push_back(row);
        bounds::FitPoint pt;
        pt.params["delta"] = delta;
        pt.params["L"] = L;
        pt.value = est.value;
        pt.std_error = est.std_error;
        pt.id = row.param_value_str;
        points.push_back(pt);
    }
    std::string regime_name = cfg.regime.empty() ? "TailMLSIfct" : cfg.regime;
    bounds::BoundRegime regime;
    regime.kind = bounds::regime_from_string(regime_name);
    regime.params["d"] = static_cast<double>(cfg.model->grid.d);
    if (cfg.weight) regime.params["beta"] = cfg.weight->beta;
    weights::DimensionContext ctx(cfg.model->grid.d);
    const weights::WeightFamily* w = cfg.weight ? &*cfg.weight : nullptr;
    if (auto v = fit_verdict(regime, points, w, &ctx,
                             cfg.weight ? cfg.weight->label() : "-")) {
        report.verdicts.push_back(*v);
    }
}

void run_covariance_scan(const ExperimentConfig& cfg, Report& report) {
    std::vector<bounds::FitPoint> points;
    for (double lag : cfg.sweep) {
        std::vector<double> lag_vec(cfg.model->grid.d, 0.0);
        lag_vec[0] = lag;
        auto est = estimators::empirical_covariance(*cfg.model, lag_vec, cfg.replicates, cfg.seed);
        ReportRow row = base_row(cfg);
        row.param_name = "lag";
        row.param_value = lag;
        row.param_value_str = fmt(lag);
        fill_estimate(row, est);
        report.rows.push_back(row);
        bounds::FitPoint pt;
        pt.params["x_norm"] = std::abs(lag);
        pt.value = std::abs(est.value);
        pt.std_error = est.std_error;
        pt.id = "lag=" + fmt(lag);
        points.push_back(pt);
    }
    if (cfg.weight) {
        bounds::BoundRegime regime;
        regime.kind = bounds::Regime::CovDecay;
        if (auto v = fit_verdict(regime, points, &*cfg.weight, nullptr, cfg.weight->label())) {
            report.verdicts.push_back(*v);
        }
    }
}

void run_mixing_scan(const ExperimentConfig& cfg, Report& report) {
    const auto& grid = cfg.model->grid;
    double d_eff = std::isfinite(cfg.D)
                       ? cfg.D
                       : cfg.region_size * std::sqrt(static_cast<double>(grid.d));
    std::vector<bounds::FitPoint> points;
    for (double R : cfg.sweep) {
        estimators::MixingQuery query;
        query.R = R;
        query.D = cfg.D;
        query.family.levels = cfg.levels;
        query.family.region_size = cfg.region_size;
        query.region_offset_cells = cfg.region_offset;
        auto est = estimators::mixing_coefficient(*cfg.model, query, cfg.replicates, cfg.seed);
        ReportRow row = base_row(cfg);
        row.param_name = "R";
        row.param_value = R;
        row.param_value_str = fmt(R);
        fill_estimate(row, est);
        report.rows.push_back(row);
        bounds::FitPoint pt;
        pt.params["R"] = R;
        pt.params["D"] = d_eff;
        pt.value = est.value;
        pt.std_error = est.std_error;
        pt.id = "R=" + fmt(R);
        points.push_back(pt);
    }
    if (cfg.weight) {
        weights::DimensionContext ctx(grid.d);
        bounds::BoundRegime regime;
        regime.kind = bounds::Regime::MixingDecay;
        if (auto v = fit_verdict(regime, points, &*cfg.weight, &ctx, cfg.weight->label())) {
            report.verdicts.push_back(*v);
        }
    }
}

void run_moment_scan(const ExperimentConfig& cfg, Report& report) {
    std::vector<bounds::FitPoint> points;
    double base = 0.0;
    for (double p_raw : cfg.sweep) {
        int p = static_cast<int>(std::llround(p_raw));
        auto est = estimators::moment_of_average(*cfg.model, *cfg.functional, cfg.average, cfg.L,
                                                 p, cfg.replicates, cfg.seed);
        ReportRow row = base_row(cfg);
        row.param_name = "p";
        row.param_value = p;
        row.param_value_str = fmt(static_cast<double>(p));
        fill_estimate(row, est);
        report.rows.push_back(row);
        if (p == 1) base = est.value;
        bounds::FitPoint pt;
        pt.params["p"] = p;
        pt.value = est.value;
        pt.std_error = est.std_error;
        pt.id = "p=" + std::to_string(p);
        points.push_back(pt);
    }
    if (base > 0.0) {
        for (auto kind : {bounds::Regime::MomentSG, bounds::Regime::MomentLSI}) {
            bounds::BoundRegime regime;
            regime.kind = kind;
            regime.params["base"] = base;
            if (auto v = fit_verdict(regime, points, nullptr, nullptr, "base=" + fmt(base))) {
                report.verdicts.push_back(*v);
            }
        }
    }
}

void run_ergodic_scan(const ExperimentConfig& cfg, Report& report) {
    const auto& model = *cfg.model;
    const auto& f = *cfg.functional;
    std::optional<double> mean_F;
    if (f.kind != functionals::LocalFunctional::Kind::Threshold) {
        mean_F = model.analytic_mean();
    }
    for (double R : cfg.sweep) {
        std::vector<double> values(static_cast<std::size_t>(cfg.replicates));
        for (std::int64_t r = 0; r < cfg.replicates; ++r) {
            auto A = fieldgen::sample_field(model,
                                            replicate_seed(cfg.seed, static_cast<std::uint64_t>(r)));
            values[static_cast<std::size_t>(r)] = estimators::ergodic_average(A, f, R);
        }
        bool pooled = !mean_F.has_value();
        double center = 0.0;
        if (pooled) {
            center = kahan_total(values) / static_cast<double>(cfg.replicates);
        } else {
            center = *mean_F;
        }
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            double dev = values[i] - center;
            sq[i] = dev * dev;
        }
        double n = static_cast<double>(cfg.replicates);
        double mean_sq = kahan_total(sq) / (pooled ? n - 1.0 : n);
        double rms = std::sqrt(mean_sq);
        // Delta method: se(rms) = se(mean_sq) / (2 rms).
        double m = kahan_total(sq) / n;
        KahanSum dev2;
        for (double s : sq) dev2.add((s - m) * (s - m));
        double se_mean_sq = std::sqrt(dev2.value() / (n - 1.0)) / std::sqrt(n);
        ReportRow row = base_row(cfg);
        row.param_name = "R";
        row.param_value = R;
        row.param_value_str = fmt(R);
        row.value = rms;
        row.std_error = rms > 0.0 ? se_mean_sq / (2.0 * rms) : 0.0;
        row.n = cfg.replicates;
        if (pooled) row.flags = "pooled-mean";
        report.rows.push_back(row);
    }
    report.scaling = try_scaling(report.rows);
}

void run_oracle_check(const ExperimentConfig& cfg, Report& report) {
    auto results = oracle_battery();
    int index = 0;
    for (const auto& res : results) {
        ReportRow row = base_row(cfg);
        row.param_name = "check";
        row.param_value = index++;
        row.param_value_str = res.name;
        row.value = res.computed;
        row.std_error = 0.0;
        row.n = cfg.replicates;
        row.flags = res.pass ? "pass" : "fail";
        report.rows.push_back(row);
        if (!res.pass) ++report.failed_checks;
    }
}

}  // namespace

bool Report::all_verdicts_dominated() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const Verdict& v) { return v.dominated; });
}

ScalingFit fit_scaling(const std::vector<ReportRow>& rows, const std::string& x_col,
                       const std::string& y_col) {
    if (rows.size() < 3) throw std::invalid_argument("fit_scaling: needs at least 3 rows");
    std::vector<double> lx, ly;
    for (const auto& row : rows) {
        double x = row_column(row, x_col);
        double y = row_column(row, y_col);
        if (!(x > 0.0) || !(y > 0.0)) {
            throw std::invalid_argument("fit_scaling: nonpositive value in column " +
                                        (x > 0.0 ? y_col : x_col));
        }
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    double n = static_cast<double>(lx.size());
    double mx = kahan_total(lx) / n;
    double my = kahan_total(ly) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_scaling: degenerate x column");
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residual = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        fit.residual =
            std::max(fit.residual, std::abs(ly[i] - (fit.intercept + fit.slope * lx[i])));
    }
    return fit;
}

std::string results_csv(const Report& report) {
    std::ostringstream out;
    out << "experiment,model_tag,functional,avg_kind,param_name,param_value,value,std_error,n,"
           "seed,flags\n";
    for (const auto& row : report.rows) {
        out << row.experiment << ',' << row.model_tag << ',' << row.functional << ','
            << row.avg_kind << ',' << row.param_name << ',' << row.param_value_str << ','
            << fmt(row.value) << ',' << fmt(row.std_error) << ',' << row.n << ',' << row.seed
            << ',' << row.flags << '\n';
    }
    return out.str();
}

std::string verdicts_csv(const Report& report) {
    std::ostringstream out;
    out << "regime,params,C_fit,dominated,margin,worst_point,n_points\n";
    for (const auto& v : report.verdicts) {
        out << v.regime << ',' << v.params << ',' << fmt(v.C_fit) << ','
            << (v.dominated ? "true" : "false") << ',' << fmt(v.margin) << ',' << v.worst_point
            << ',' << v.n_points << '\n';
    }
    return out.str();
}

Report run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    auto start = std::chrono::steady_clock::now();
    Report report;
    report.config_hash = cfg.hash();
    report.seed = cfg.seed;
    report.tool_version = kToolVersion;

    switch (cfg.experiment) {
        case ExperimentKind::VarianceScan:
            run_variance_scan(cfg, report);
            break;
        case ExperimentKind::TailScan:
            run_tail_scan(cfg, report);
            break;
        case ExperimentKind::CovarianceScan:
            run_covariance_scan(cfg, report);
            break;
        case ExperimentKind::MixingScan:
            run_mixing_scan(cfg, report);
            break;
        case ExperimentKind::MomentScan:
            run_moment_scan(cfg, report);
            break;
        case ExperimentKind::ErgodicScan:
            run_ergodic_scan(cfg, report);
            break;
        case ExperimentKind::OracleCheck:
            run_oracle_check(cfg, report);
            break;
    }

    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir + "/results.csv", std::ios::binary);
        out << results_csv(report);
    }
    {
        std::ofstream out(cfg.output_dir + "/verdicts.csv", std::ios::binary);
        out << verdicts_csv(report);
    }
    {
        nlohmann::json j;
        j["config"] = cfg.to_canonical_json();
        j["config_hash"] = report.config_hash;
        j["seed"] = report.seed;
        j["tool_version"] = report.tool_version;
        j["wall_time_s"] = report.wall_time_s;
        j["rows"] = report.rows.size();
        if (report.scaling) {
            j["scaling"] = {{"slope", report.scaling->slope},
                            {"intercept", report.scaling->intercept},
                            {"residual", report.scaling->residual}};
        }
        nlohmann::json verdicts = nlohmann::json::array();
        for (const auto& v : report.verdicts) {
            verdicts.push_back({{"regime", v.regime},
                                {"params", v.params},
                                {"C_fit", v.C_fit},
                                {"dominated", v.dominated},
                                {"margin", v.margin},
                                {"worst_point", v.worst_point},
                                {"n_points", v.n_points}});
        }
        j["verdicts"] = verdicts;
        j["failed_checks"] = report.failed_checks;
        std::ofstream out(cfg.output_dir + "/report.json", std::ios::binary);
        out << j.dump(2) << '\n';
    }
    return report;
}

namespace {

void push_check(std::vector<OracleCheckResult>& out, const std::string& name, double expected,
                double computed, double tolerance = 0.0) {
    OracleCheckResult res;
    res.name = name;
    res.expected = expected;
    res.computed = computed;
    res.pass = tolerance == 0.0 ? computed == expected
                                : std::abs(computed - expected) <= tolerance;
    out.push_back(res);
}

}  // namespace

std::vector<OracleCheckResult> oracle_battery() {
    using namespace msfi::oracle;
    std::vector<OracleCheckResult> out;

    auto bern = CellLaw::bernoulli(0.5);
    {
        auto spec = TinyFieldSpec::iid(2, bern);
        auto m = exact_moments(spec, TinyFunctional::sum());
        push_check(out, "moments/iid2_sum_mean", 1.0, m.mean);
        push_check(out, "moments/iid2_sum_variance", 0.5, m.variance);
    }
    {
        auto spec = TinyFieldSpec::iid(3, bern);
        auto constant = TinyFunctional::custom_fn([](const std::vector<double>&) { return 7.0; });
        push_check(out, "moments/constant_variance", 0.0, exact_moments(spec, constant).variance);
    }
    {
        TinyFieldSpec spec;
        spec.laws = {bern, bern};
        spec.duplicate_of = {-1, 0};
        push_check(out, "moments/duplicate_sum_variance", 1.0,
                   exact_moments(spec, TinyFunctional::sum()).variance);
    }
    {
        auto spec = TinyFieldSpec::iid(2, bern);
        auto osc = exact_oscillation(spec, TinyFunctional::sum(), {0});
        bool all_one = true;
        for (const auto& [ext, v] : osc.by_exterior) all_one = all_one && v == 1.0;
        push_check(out, "oscillation/sum_cell0_constant1", 1.0, all_one ? 1.0 : 0.0);
        auto only_second =
            TinyFunctional::custom_fn([](const std::vector<double>& a) { return a[1]; });
        push_check(out, "oscillation/independent_zero", 0.0,
                   exact_oscillation(spec, only_second, {0}).mean_square);
        push_check(out, "oscillation/product_mean_square", 0.5,
                   exact_oscillation(spec, TinyFunctional::cell_product(), {0}).mean_square);
    }
    {
        auto spec = TinyFieldSpec::iid(2, bern);
        auto es = efron_stein_check(spec, TinyFunctional::sum());
        push_check(out, "efron_stein/iid2_sum_variance", 0.5, es.variance);
        push_check(out, "efron_stein/iid2_sum_rhs", 1.0, es.rhs);
        push_check(out, "efron_stein/iid2_sum_holds", 1.0, es.holds ? 1.0 : 0.0);
        auto constant = TinyFunctional::custom_fn([](const std::vector<double>&) { return 3.0; });
        auto es0 = efron_stein_check(spec, constant);
        push_check(out, "efron_stein/constant_holds", 1.0,
                   (es0.holds && es0.variance == 0.0) ? 1.0 : 0.0);
    }
    {
        auto spec = TinyFieldSpec::iid(8, bern);
        auto es = efron_stein_check(spec, TinyFunctional::threshold_count(0.5));
        push_check(out, "efron_stein/threshold8_holds", 1.0, es.holds ? 1.0 : 0.0);
    }
    {
        auto spec = TinyFieldSpec::iid(4, bern);
        push_check(out, "alpha/iid_zero", 0.0, exact_alpha(spec, {0, 1}, {2, 3}));
    }
    {
        TinyFieldSpec spec;
        spec.laws = {bern, bern};
        spec.duplicate_of = {-1, 0};
        push_check(out, "alpha/duplicate_quarter", 0.25, exact_alpha(spec, {0}, {1}));
    }
    {
        // Chain: cell 1 copies cell 0, cell 2 fresh.
        TinyFieldSpec spec;
        spec.laws = {bern, bern, bern};
        spec.duplicate_of = {-1, 0, -1};
        push_check(out, "alpha/chain_quarter", 0.25, exact_alpha(spec, {0}, {1, 2}));
    }

    // Randomized product-law spectral-gap checks.
    Philox rng(0x5eedULL, 0);
    int held = 0;
    const int total = 50;
    for (int i = 0; i < total; ++i) {
        int n = 2 + static_cast<int>(rng.next_u64() % 7);  // 2..8 cells
        TinyFieldSpec spec;
        for (int cell = 0; cell < n; ++cell) {
            double p = 0.05 + 0.9 * rng.next_double();
            spec.laws.push_back(CellLaw::bernoulli(p));
            spec.duplicate_of.push_back(-1);
        }
        TinyFunctional X;
        switch (rng.next_u64() % 3) {
            case 0:
                X = TinyFunctional::sum();
                break;
            case 1:
                X = TinyFunctional::cell_product();
                break;
            default:
                X = TinyFunctional::threshold_count(rng.next_double());
                break;
        }
        if (efron_stein_check(spec, X).holds) ++held;
    }
    push_check(out, "efron_stein/randomized_50", static_cast<double>(total),
               static_cast<double>(held));

    return out;
}

}  // namespace msfi::runner
