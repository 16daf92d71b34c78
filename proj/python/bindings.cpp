#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcmfit/app/design.hpp"
#include "lcmfit/app/pipeline.hpp"
#include "lcmfit/app/report.hpp"
#include "lcmfit/completion.hpp"
#include "lcmfit/inference.hpp"
#include "lcmfit/nullspace.hpp"
#include "lcmfit/oracle.hpp"

namespace py = pybind11;
using namespace lcmfit;

namespace {

Family make_family(const std::string& name, const std::optional<VectorXd>& trials) {
  if (name == "poisson") {
    if (trials) throw InvalidModel("trials apply only to the Bernoulli family");
    return Family::poisson();
  }
  if (name != "bernoulli") throw InvalidModel("family must be 'bernoulli' or 'poisson'");
  return trials ? Family::bernoulli(*trials) : Family::bernoulli();
}

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["beta_hat"] = f.beta_hat;
  d["loglik_trace"] = f.loglik_trace;
  d["grad_norm"] = f.grad_norm;
  d["fisher"] = f.fisher.matrix;
  d["converged_interior"] = f.converged_interior;
  d["iterations"] = f.iterations;
  d["stop_reason"] = to_string(f.stop_reason);
  d["reference_scale"] = f.reference_scale;
  return d;
}

py::dict basis_dict(const NullBasis& b) {
  py::dict d;
  d["eigenvalues"] = b.eigenvalues;
  d["threshold"] = b.threshold;
  d["source"] = to_string(b.source);
  d["basis"] = b.basis;
  d["j"] = b.j;
  return d;
}

py::dict dor_dict(const DirectionOfRecession& r) {
  py::dict d;
  d["delta"] = r.delta;
  d["zeta"] = r.zeta;
  d["a_coeffs"] = r.a_coeffs;
  d["f_value"] = r.f_value;
  d["is_dor"] = r.is_dor;
  d["is_gdor"] = r.is_gdor;
  return d;
}

py::dict interval_dict(const OneSidedInterval& i) {
  py::dict d;
  d["target_id"] = i.target_id;
  d["lower"] = i.lower;
  d["upper"] = i.upper;
  d["alpha"] = i.alpha;
  d["achieved_constraint"] = i.achieved_constraint;
  d["solver_status"] = i.solver_status;
  return d;
}

CiProblem problem_for(const GlmModel& model, const LcmResult& lcm, double alpha, const py::object& target) {
  if (py::isinstance<py::int_>(target)) return make_ci_problem(model, lcm, alpha, MeanTarget{target.cast<Index>()});
  return make_ci_problem(model, lcm, alpha, LinearTarget{target.cast<VectorXd>()});
}

}  // namespace

PYBIND11_MODULE(_lcmfit, m) {
  m.doc() = "Maximum likelihood in the completion of discrete exponential family GLMs";

  py::register_exception<Error>(m, "LcmfitError");

  py::class_<GlmModel>(m, "GlmModel")
      .def(py::init([](const MatrixXd& M, const VectorXd& y, const std::string& family,
                       const std::optional<VectorXd>& trials) { return GlmModel(M, y, make_family(family, trials)); }),
           py::arg("M"), py::arg("y"), py::arg("family") = "bernoulli", py::arg("trials") = py::none())
      .def_property_readonly("M", &GlmModel::M)
      .def_property_readonly("y", &GlmModel::y)
      .def_property_readonly("n", &GlmModel::n)
      .def_property_readonly("p", &GlmModel::p)
      .def_property_readonly("family", [](const GlmModel& g) { return to_string(g.family().tag); });

  m.def("log_likelihood", [](const GlmModel& g, const VectorXd& beta) { return log_likelihood(g, beta); });
  m.def("score", [](const GlmModel& g, const VectorXd& beta) { return score(g, CanonicalPoint(g, beta)); });
  m.def("fisher_information",
        [](const GlmModel& g, const VectorXd& beta) { return fisher_information(g, CanonicalPoint(g, beta)).matrix; });
  m.def("canonical_statistic", &canonical_statistic);

  m.def(
      "fit_mle",
      [](const GlmModel& g, int max_iterations, double rel_tol, double grad_tol) {
        FitConfig c;
        c.max_iterations = max_iterations;
        c.rel_tol = rel_tol;
        c.grad_tol = grad_tol;
        return fit_dict(fit_mle(g, c));
      },
      py::arg("model"), py::arg("max_iterations") = 200, py::arg("rel_tol") = 1e-10, py::arg("grad_tol") = 1e-8);

  m.def(
      "null_basis",
      [](const MatrixXd& fisher, std::optional<double> epsilon, double reference_scale) {
        return basis_dict(null_basis(FisherInfo{fisher}, NullBasisOptions{epsilon, reference_scale}));
      },
      py::arg("fisher"), py::arg("epsilon") = py::none(), py::arg("reference_scale") = 1.0);

  m.def("subspace_distance", &subspace_distance);

  m.def(
      "iterate_to_lcm",
      [](const GlmModel& g, std::optional<double> epsilon) {
        LcmOptions o;
        o.epsilon = epsilon;
        const LcmResult r = iterate_to_lcm(g, o);
        py::dict d;
        d["fixed"] = r.support.fixed;
        d["free"] = r.support.free;
        d["degenerate"] = r.support.degenerate;
        d["rounds"] = r.round_count();
        d["initial_fit"] = fit_dict(r.initial_fit);
        d["null_basis"] = basis_dict(r.initial_basis);
        d["fitted_mean"] = r.lcm_fit.fitted_mean;
        d["beta_lcm"] = r.lcm_fit.beta_full;
        py::list dors;
        for (const auto& x : r.dors()) dors.append(dor_dict(x));
        d["dors"] = dors;
        return d;
      },
      py::arg("model"), py::arg("epsilon") = py::none());

  m.def(
      "one_sided_ci",
      [](const GlmModel& g, const py::object& target, double alpha, std::optional<double> epsilon) {
        LcmOptions o;
        o.epsilon = epsilon;
        const LcmResult r = iterate_to_lcm(g, o);
        return interval_dict(one_sided_ci(problem_for(g, r, alpha, target)));
      },
      py::arg("model"), py::arg("target"), py::arg("alpha") = 0.05, py::arg("epsilon") = py::none(),
      "Target is a response index (mean value) or a coefficient vector (linear functional).");

  m.def(
      "oracle_ci_grid",
      [](const GlmModel& g, const py::object& target, double alpha) {
        const LcmResult r = iterate_to_lcm(g);
        return interval_dict(oracle::oracle_ci_grid(problem_for(g, r, alpha, target)));
      },
      py::arg("model"), py::arg("target"), py::arg("alpha") = 0.05);

  m.def(
      "oracle_dor_verify",
      [](const GlmModel& g, const VectorXd& delta, std::optional<int> cap) { return oracle::oracle_dor_verify(g, delta, cap); },
      py::arg("model"), py::arg("delta"), py::arg("cap") = py::none());

  m.def("oracle_boundary_status", [](const GlmModel& g) {
    const auto s = oracle::oracle_boundary_status(g);
    py::dict d;
    d["on_boundary"] = s.on_boundary;
    d["fixed"] = s.fixed;
    d["witness"] = s.witness ? py::cast(*s.witness) : py::none();
    return d;
  });

  m.def(
      "enumerate_support",
      [](const GlmModel& g, std::optional<int> cap) {
        const auto s = oracle::enumerate_support(g, cap);
        MatrixXd pts(static_cast<Index>(s.points.size()), g.p());
        for (std::size_t i = 0; i < s.points.size(); ++i) pts.row(static_cast<Index>(i)) = s.points[i].transpose();
        py::dict d;
        d["points"] = pts;
        d["responses"] = s.responses;
        d["cap"] = s.cap;
        return d;
      },
      py::arg("model"), py::arg("cap") = py::none());

  m.def(
      "run_pipeline_json",
      [](const std::string& csv_path, const std::string& response, const std::vector<std::string>& predictors,
         const std::string& family, int interactions, double alpha, bool verify_oracle) {
        app::ModelSpec spec;
        spec.response = response;
        for (const auto& p : predictors) spec.predictors.push_back({p, std::nullopt});
        spec.interaction_order = interactions;
        spec.family = family == "poisson" ? FamilyTag::poisson : FamilyTag::bernoulli;
        const app::Design design = app::ingest_csv(csv_path, spec);
        app::PipelineOptions o;
        o.alpha = alpha;
        o.verify_oracle = verify_oracle;
        app::Report report;
        {
          py::gil_scoped_release release;
          report = app::run_pipeline(design.model(), o, design.column_names, design.row_labels);
        }
        report.dropped_columns = design.dropped_columns;
        return app::report_to_json(report).dump();
      },
      py::arg("data"), py::arg("response"), py::arg("predictors"), py::arg("family") = "bernoulli",
      py::arg("interactions") = 1, py::arg("alpha") = 0.05, py::arg("verify_oracle") = false);
}
