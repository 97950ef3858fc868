#include "msfi/bounds.hpp"
#include "msfi/config.hpp"
#include "msfi/estimators.hpp"
#include "msfi/fieldgen.hpp"
#include "msfi/functionals.hpp"
#include "msfi/oracle.hpp"
#include "msfi/runner.hpp"
#include "msfi/weights.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace msfi;

namespace {

py::array_t<double> values_array(const fieldgen::FieldSample& sample) {
    std::vector<py::ssize_t> shape(sample.grid.d, sample.grid.N);
    py::array_t<double> arr(shape);
    std::copy(sample.values.begin(), sample.values.end(), arr.mutable_data());
    return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo laboratory for stationary random fields: weight families, "
              "field synthesis, spatial-average estimators, bound curves and exact "
              "small-instance oracles.";

    // ---- weights ----
    py::class_<weights::WeightFamily>(m, "WeightFamily")
        .def_static("algebraic", &weights::WeightFamily::algebraic, py::arg("beta"),
                    py::arg("normalization") = 1.0)
        .def_static("stretched_exp", &weights::WeightFamily::stretched_exp, py::arg("beta"),
                    py::arg("c"), py::arg("normalization") = 1.0)
        .def_static("compact", &weights::WeightFamily::compact, py::arg("R"),
                    py::arg("normalization") = 1.0)
        .def("label", &weights::WeightFamily::label)
        .def("__repr__", &weights::WeightFamily::label);

    py::class_<weights::DimensionContext>(m, "DimensionContext")
        .def(py::init<int>(), py::arg("d"))
        .def_readonly("d", &weights::DimensionContext::d)
        .def_readonly("ball_volume_unit", &weights::DimensionContext::ball_volume_unit);

    m.def("eval_weight", &weights::eval_weight, py::arg("w"), py::arg("ell"));
    m.def("tail_integral", &weights::tail_integral, py::arg("w"), py::arg("r"));
    m.def("pi_star", &weights::pi_star, py::arg("w"), py::arg("ctx"), py::arg("ell"));
    m.def("pi_star_asymptotic", &weights::pi_star_asymptotic, py::arg("beta"), py::arg("ctx"),
          py::arg("ell"));

    // ---- field generation ----
    py::class_<fieldgen::GridSpec>(m, "GridSpec")
        .def(py::init([](int d, int N, double h) {
                 fieldgen::GridSpec g;
                 g.d = d;
                 g.N = N;
                 g.h = h;
                 g.validate();
                 return g;
             }),
             py::arg("d"), py::arg("N"), py::arg("h") = 1.0)
        .def_readonly("d", &fieldgen::GridSpec::d)
        .def_readonly("N", &fieldgen::GridSpec::N)
        .def_readonly("h", &fieldgen::GridSpec::h);

    py::class_<fieldgen::CovarianceModel>(m, "CovarianceModel")
        .def_static("delta_lag", &fieldgen::CovarianceModel::delta_lag, py::arg("sigma2"))
        .def_static("exponential", &fieldgen::CovarianceModel::exponential, py::arg("sigma2"),
                    py::arg("rho"))
        .def_static("algebraic_decay", &fieldgen::CovarianceModel::algebraic_decay,
                    py::arg("sigma2"), py::arg("gamma"))
        .def("label", &fieldgen::CovarianceModel::label);

    py::class_<fieldgen::RadiusLaw>(m, "RadiusLaw")
        .def_static("fixed", &fieldgen::RadiusLaw::fixed, py::arg("r"))
        .def_static("pareto_tail", &fieldgen::RadiusLaw::pareto_tail, py::arg("r0"), py::arg("a"));

    py::class_<fieldgen::BlockLaw>(m, "BlockLaw")
        .def_static("bernoulli", &fieldgen::BlockLaw::bernoulli, py::arg("p"))
        .def_static("uniform_pm1", &fieldgen::BlockLaw::uniform_pm1);

    py::class_<fieldgen::FieldModel>(m, "FieldModel")
        .def_static("gaussian", &fieldgen::FieldModel::gaussian, py::arg("grid"), py::arg("cov"))
        .def_static("boolean", &fieldgen::FieldModel::boolean, py::arg("grid"),
                    py::arg("intensity"), py::arg("radius"))
        .def_static("block_iid", &fieldgen::FieldModel::block_iid, py::arg("grid"),
                    py::arg("block"), py::arg("law"))
        .def("label", &fieldgen::FieldModel::label)
        .def("analytic_mean",
             [](const fieldgen::FieldModel& model) { return model.analytic_mean(); });

    py::class_<fieldgen::FieldSample>(m, "FieldSample")
        .def_readonly("grid", &fieldgen::FieldSample::grid)
        .def_readonly("model_tag", &fieldgen::FieldSample::model_tag)
        .def_readonly("seed", &fieldgen::FieldSample::seed)
        .def_property_readonly("values", &values_array);

    m.def("sample_gaussian", &fieldgen::sample_gaussian, py::arg("grid"), py::arg("cov"),
          py::arg("seed"));
    m.def("sample_boolean", &fieldgen::sample_boolean, py::arg("grid"), py::arg("intensity"),
          py::arg("radius"), py::arg("seed"));
    m.def("sample_block_iid", &fieldgen::sample_block_iid, py::arg("grid"), py::arg("block"),
          py::arg("law"), py::arg("seed"));
    m.def("sample_field", &fieldgen::sample_field, py::arg("model"), py::arg("seed"));
    m.def("wrapped_covariance",
          [](const fieldgen::CovarianceModel& cov, const fieldgen::GridSpec& grid,
             const std::vector<int>& offset) {
              std::array<int, 3> off{0, 0, 0};
              for (std::size_t i = 0; i < offset.size() && i < 3; ++i) off[i] = offset[i];
              return fieldgen::wrapped_covariance(cov, grid, off);
          },
          py::arg("cov"), py::arg("grid"), py::arg("offset"));
    m.def("write_field", &fieldgen::write_field, py::arg("sample"), py::arg("path"));
    m.def("read_field", &fieldgen::read_field, py::arg("path"), py::arg("h") = 1.0);

    // ---- functionals ----
    py::class_<functionals::LocalFunctional>(m, "LocalFunctional")
        .def_static("cell_value", &functionals::LocalFunctional::cell_value)
        .def_static("ball_average", &functionals::LocalFunctional::ball_average, py::arg("radius"))
        .def_static("threshold", &functionals::LocalFunctional::threshold, py::arg("radius"),
                    py::arg("level"))
        .def("label", &functionals::LocalFunctional::label);

    py::enum_<functionals::AverageKind>(m, "AverageKind")
        .value("ExpKernel", functionals::AverageKind::ExpKernel)
        .value("Box", functionals::AverageKind::Box);

    m.def("transform_field", &functionals::transform_field, py::arg("f"), py::arg("A"));
    m.def("spatial_average",
          [](const fieldgen::FieldSample& F, double mean_F, double L,
             functionals::AverageKind kind) {
              auto r = functionals::spatial_average(F, mean_F, L, kind);
              return py::make_tuple(r.value, r.truncated);
          },
          py::arg("F"), py::arg("mean_F"), py::arg("L"), py::arg("kind"),
          "Returns (value, truncated_flag).");
    m.def("derivative_profile", &functionals::derivative_profile, py::arg("ell"),
          py::arg("x_norm"), py::arg("L"), py::arg("ctx"), py::arg("C_loc"));
    m.def("locality_defect", &functionals::locality_defect, py::arg("f"), py::arg("model"),
          py::arg("ell"), py::arg("replicates"), py::arg("seed"));

    // ---- estimators ----
    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("std_error", &Estimate::std_error)
        .def_readonly("n", &Estimate::n)
        .def_readonly("seed", &Estimate::seed)
        .def_property_readonly("flags",
                               [](const Estimate& e) {
                                   return std::vector<std::string>(e.flags.begin(),
                                                                   e.flags.end());
                               })
        .def("__repr__", [](const Estimate& e) {
            return "Estimate(value=" + std::to_string(e.value) +
                   ", std_error=" + std::to_string(e.std_error) +
                   ", n=" + std::to_string(e.n) + ")";
        });

    py::class_<estimators::EventFamily>(m, "EventFamily")
        .def(py::init([](std::vector<double> levels, double region_size) {
                 estimators::EventFamily fam;
                 fam.levels = std::move(levels);
                 fam.region_size = region_size;
                 fam.validate();
                 return fam;
             }),
             py::arg("levels"), py::arg("region_size"));

    py::class_<estimators::MixingQuery>(m, "MixingQuery")
        .def(py::init([](double R, double D, const estimators::EventFamily& family,
                         std::int64_t offset) {
                 estimators::MixingQuery q;
                 q.R = R;
                 q.D = D;
                 q.family = family;
                 q.region_offset_cells = offset;
                 return q;
             }),
             py::arg("R"), py::arg("D"), py::arg("family"), py::arg("region_offset_cells") = 0);

    m.def("empirical_covariance", &estimators::empirical_covariance, py::arg("model"),
          py::arg("lag"), py::arg("replicates"), py::arg("seed"));
    m.def("variance_of_average", &estimators::variance_of_average, py::arg("model"), py::arg("f"),
          py::arg("kind"), py::arg("L"), py::arg("replicates"), py::arg("seed"));
    m.def("tail_probability", &estimators::tail_probability, py::arg("model"), py::arg("f"),
          py::arg("kind"), py::arg("L"), py::arg("delta"), py::arg("replicates"), py::arg("seed"));
    m.def("moment_of_average", &estimators::moment_of_average, py::arg("model"), py::arg("f"),
          py::arg("kind"), py::arg("L"), py::arg("p"), py::arg("replicates"), py::arg("seed"));
    m.def("mixing_coefficient", &estimators::mixing_coefficient, py::arg("model"),
          py::arg("query"), py::arg("replicates"), py::arg("seed"));
    m.def("ergodic_average", &estimators::ergodic_average, py::arg("sample"), py::arg("f"),
          py::arg("R"));

    // ---- bounds ----
    py::class_<bounds::BoundRegime>(m, "BoundRegime")
        .def(py::init([](const std::string& name, std::map<std::string, double> params) {
                 bounds::BoundRegime r;
                 r.kind = bounds::regime_from_string(name);
                 r.params = std::move(params);
                 return r;
             }),
             py::arg("kind"), py::arg("params") = std::map<std::string, double>{});

    py::class_<bounds::FitResult>(m, "FitResult")
        .def_readonly("C_fit", &bounds::FitResult::C_fit)
        .def_readonly("dominated", &bounds::FitResult::dominated)
        .def_readonly("margin", &bounds::FitResult::margin)
        .def_readonly("worst_point", &bounds::FitResult::worst_point);

    m.def("predicted_variance", &bounds::predicted_variance, py::arg("w"), py::arg("ctx"),
          py::arg("L"));
    m.def("predicted_tail", &bounds::predicted_tail, py::arg("regime"), py::arg("delta"),
          py::arg("L"), py::arg("w"), py::arg("ctx"));
    m.def("predicted_covariance_decay", &bounds::predicted_covariance_decay, py::arg("w"),
          py::arg("x_norm"), py::arg("C"));
    m.def("predicted_mixing", &bounds::predicted_mixing, py::arg("w"), py::arg("ctx"),
          py::arg("R"), py::arg("D"), py::arg("C"));
    m.def("psi_l", &bounds::psi_l, py::arg("u"), py::arg("L_param"), py::arg("C"));
    m.def("psi_p0_alpha", &bounds::psi_p0_alpha, py::arg("u"), py::arg("p0"), py::arg("alpha"));
    m.def("fit_constant",
          [](const bounds::BoundRegime& regime,
             const std::vector<std::tuple<std::map<std::string, double>, double, double>>& pts,
             const weights::WeightFamily* w, const weights::DimensionContext* ctx) {
              std::vector<bounds::FitPoint> points;
              int index = 0;
              for (const auto& [params, value, se] : pts) {
                  bounds::FitPoint pt;
                  pt.params = params;
                  pt.value = value;
                  pt.std_error = se;
                  pt.id = "point" + std::to_string(index++);
                  points.push_back(pt);
              }
              return bounds::fit_constant(regime, points, w, ctx);
          },
          py::arg("regime"), py::arg("points"), py::arg("w") = nullptr, py::arg("ctx") = nullptr);

    // ---- oracle ----
    py::class_<oracle::CellLaw>(m, "CellLaw")
        .def_static("bernoulli", &oracle::CellLaw::bernoulli, py::arg("p"))
        .def_static("from_atoms", [](const std::vector<std::pair<double, double>>& atoms) {
            std::vector<oracle::Atom> out;
            for (auto [v, p] : atoms) out.push_back({v, p});
            return oracle::CellLaw::from_atoms(out);
        });

    py::class_<oracle::TinyFieldSpec>(m, "TinyFieldSpec")
        .def_static("iid", &oracle::TinyFieldSpec::iid, py::arg("n"), py::arg("law"))
        .def(py::init([](std::vector<oracle::CellLaw> laws, std::vector<int> dup) {
                 oracle::TinyFieldSpec spec;
                 spec.laws = std::move(laws);
                 spec.duplicate_of = std::move(dup);
                 spec.validate();
                 return spec;
             }),
             py::arg("laws"), py::arg("duplicate_of"));

    py::class_<oracle::TinyFunctional>(m, "TinyFunctional")
        .def_static("sum", &oracle::TinyFunctional::sum)
        .def_static("cell_product", &oracle::TinyFunctional::cell_product)
        .def_static("threshold_count", &oracle::TinyFunctional::threshold_count, py::arg("level"))
        .def_static("custom_fn", &oracle::TinyFunctional::custom_fn, py::arg("f"));

    m.def("exact_moments",
          [](const oracle::TinyFieldSpec& spec, const oracle::TinyFunctional& X) {
              auto mo = oracle::exact_moments(spec, X);
              return py::make_tuple(mo.mean, mo.variance, mo.fourth_central);
          },
          py::arg("spec"), py::arg("X"));
    m.def("exact_oscillation",
          [](const oracle::TinyFieldSpec& spec, const oracle::TinyFunctional& X,
             const std::vector<int>& S) {
              auto res = oracle::exact_oscillation(spec, X, S);
              return py::make_tuple(res.by_exterior, res.mean_square);
          },
          py::arg("spec"), py::arg("X"), py::arg("S"));
    m.def("efron_stein_check",
          [](const oracle::TinyFieldSpec& spec, const oracle::TinyFunctional& X) {
              auto res = oracle::efron_stein_check(spec, X);
              return py::make_tuple(res.variance, res.rhs, res.holds);
          },
          py::arg("spec"), py::arg("X"));
    m.def("exact_alpha", &oracle::exact_alpha, py::arg("spec"), py::arg("S"), py::arg("T"));

    // ---- runner ----
    m.def("run_experiment_file",
          [](const std::string& config_path) {
              auto cfg = config::ExperimentConfig::from_file(config_path);
              auto report = runner::run_experiment(cfg);
              py::dict out;
              out["config_hash"] = report.config_hash;
              out["rows"] = report.rows.size();
              out["verdicts_dominated"] = report.all_verdicts_dominated();
              out["failed_checks"] = report.failed_checks;
              if (report.scaling) {
                  out["slope"] = report.scaling->slope;
                  out["residual"] = report.scaling->residual;
              }
              return out;
          },
          py::arg("config_path"),
          "Run an experiment config file; returns a summary dict.");

    m.attr("__version__") = "0.1.0";
}
