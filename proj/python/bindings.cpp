#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pidkl/cli/runner.hpp"
#include "pidkl/gp/joint_model.hpp"
#include "pidkl/hmc/map_estimate.hpp"
#include "pidkl/hmc/sampler.hpp"
#include "pidkl/pde/problems.hpp"
#include "pidkl/predict/bma.hpp"
#include "pidkl/predict/summary.hpp"
#include "pidkl/pretrain/pretrain.hpp"

namespace py = pybind11;
using namespace pidkl;

namespace {

Mat points_to_matrix(const std::vector<Point>& pts) {
  if (pts.empty()) return Mat(0, 0);
  Mat m(pts.size(), pts[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

std::vector<Point> matrix_to_points(const Mat& m) {
  std::vector<Point> pts;
  pts.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    pts.push_back(m.row(i).transpose());
  return pts;
}

kernel::FeatureMap feature_map_from_report(const pretrain::PretrainReport& r) {
  kernel::FeatureMap f;
  f.net = r.theta_fix;
  f.scaler = r.scaler;
  return f;
}

kernel::FeatureMap identity_feature_map() {
  kernel::FeatureMap f;
  f.identity = true;
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Two-stage Bayesian inference of linear PDE coefficients with a "
      "physics-informed deep-kernel GP surrogate";

  py::class_<Domain>(m, "Domain")
      .def_readonly("t_max", &Domain::t_max)
      .def_readonly("x_lo", &Domain::x_lo)
      .def_readonly("x_hi", &Domain::x_hi)
      .def_property_readonly("dx", &Domain::dx)
      .def_property_readonly("dim", &Domain::dim);

  py::class_<pde::ProblemSpec>(m, "ProblemSpec")
      .def_readonly("name", &pde::ProblemSpec::name)
      .def_readonly("domain", &pde::ProblemSpec::domain)
      .def_readonly("phi_true", &pde::ProblemSpec::phi_true)
      .def_readonly("phi_lo", &pde::ProblemSpec::phi_lo)
      .def_readonly("phi_hi", &pde::ProblemSpec::phi_hi)
      .def_readonly("phi_names", &pde::ProblemSpec::phi_names)
      .def("solution",
           [](const pde::ProblemSpec& p, const Point& s) {
             return p.solution(s);
           })
      .def("source", &pde::ProblemSpec::source_at)
      .def("apply_operator",
           [](const pde::ProblemSpec& p,
              const std::function<double(const Point&)>& field, const Point& s,
              const Vec& phi) {
             return pde::apply_operator(
                 p.op, field, s, phi,
                 pde::StencilPolicy::for_fields(p.domain));
           });

  m.def(
      "make_problem",
      [](const std::string& name, std::optional<int> dimension,
         std::optional<Vec> phi_true) {
        pde::ProblemOverrides ov;
        ov.dimension = dimension;
        ov.phi_true = std::move(phi_true);
        return pde::make_problem(name, ov);
      },
      py::arg("name"), py::arg("dimension") = std::nullopt,
      py::arg("phi_true") = std::nullopt);

  py::class_<gp::ObservationSet>(m, "ObservationSet")
      .def_property_readonly(
          "s_u", [](const gp::ObservationSet& o) { return points_to_matrix(o.s_u); })
      .def_property_readonly(
          "s_f", [](const gp::ObservationSet& o) { return points_to_matrix(o.s_f); })
      .def_readonly("u", &gp::ObservationSet::u)
      .def_readonly("f", &gp::ObservationSet::f)
      .def_readonly("tau_u_sq", &gp::ObservationSet::tau_u_sq)
      .def_readonly("tau_f_sq", &gp::ObservationSet::tau_f_sq);

  m.def("generate_observations", &pde::generate_observations,
        py::arg("problem"), py::arg("n_u"), py::arg("n_f"), py::arg("seed"),
        py::arg("tau_u_sq") = 1e-6, py::arg("tau_f_sq") = 1e-6);

  m.def(
      "sample_interior",
      [](const pde::ProblemSpec& p, int n, unsigned long long seed) {
        return points_to_matrix(pde::sample_interior(p.domain, n, seed));
      },
      py::arg("problem"), py::arg("n"), py::arg("seed"));

  py::class_<kernel::FeatureMap>(m, "FeatureMap")
      .def("__call__", [](const kernel::FeatureMap& f, const Point& s) {
        return f(s);
      });
  m.def("identity_feature_map", &identity_feature_map);

  m.def(
      "joint_nlml",
      [](const gp::ObservationSet& obs, const kernel::FeatureMap& fmap,
         double log_sf2, const Vec& log_len, const Vec& phi,
         const pde::ProblemSpec& problem) {
        kernel::KernelHyper h{log_sf2, log_len};
        return gp::joint_nlml(obs, fmap, h, phi, problem.op,
                              pde::StencilPolicy::for_kernels(problem.domain));
      },
      py::arg("obs"), py::arg("feature_map"), py::arg("log_sf2"),
      py::arg("log_len"), py::arg("phi"), py::arg("problem"));

  m.def(
      "decomposed_loglik",
      [](const gp::ObservationSet& obs, const kernel::FeatureMap& fmap,
         double log_sf2, const Vec& log_len, const Vec& phi,
         const pde::ProblemSpec& problem) {
        kernel::KernelHyper h{log_sf2, log_len};
        const auto d = gp::decomposed_loglik(
            obs, fmap, h, phi, problem.op,
            pde::StencilPolicy::for_kernels(problem.domain));
        return py::make_tuple(d.fidelity, d.complexity, d.constant,
                              d.loglik());
      },
      py::arg("obs"), py::arg("feature_map"), py::arg("log_sf2"),
      py::arg("log_len"), py::arg("phi"), py::arg("problem"));

  py::class_<pretrain::PretrainReport>(m, "PretrainReport")
      .def_property_readonly(
          "theta",
          [](const pretrain::PretrainReport& r) { return r.theta_fix.flatten(); })
      .def_property_readonly(
          "psi_pre",
          [](const pretrain::PretrainReport& r) { return r.psi_pre.pack(); })
      .def_readonly("phi_pre", &pretrain::PretrainReport::phi_pre)
      .def_readonly("iterations", &pretrain::PretrainReport::iterations)
      .def_property_readonly("trace",
                             [](const pretrain::PretrainReport& r) {
                               Mat t(r.trace.size(), 4);
                               for (std::size_t i = 0; i < r.trace.size(); ++i)
                                 for (int c = 0; c < 4; ++c)
                                   t(static_cast<Eigen::Index>(i), c) =
                                       r.trace[i][c];
                               return t;
                             })
      .def("feature_map", &feature_map_from_report);

  m.def(
      "run_pretraining",
      [](const pde::ProblemSpec& problem, const gp::ObservationSet& obs,
         int n_col, int n_iter, unsigned long long seed,
         std::vector<int> hidden, int latent_dim, double lr, double w_data,
         double w_pde, double w_gp) {
        pretrain::PretrainConfig cfg;
        cfg.n_col = n_col;
        cfg.n_iter = n_iter;
        cfg.seed = seed;
        cfg.hidden = std::move(hidden);
        cfg.latent_dim = latent_dim;
        cfg.adam.lr = lr;
        cfg.weights = {w_data, w_pde, w_gp};
        return pretrain::run_pretraining(problem, obs, cfg);
      },
      py::arg("problem"), py::arg("obs"), py::arg("n_col") = 100,
      py::arg("n_iter") = 2000, py::arg("seed") = 0,
      py::arg("hidden") = std::vector<int>{32, 32}, py::arg("latent_dim") = 2,
      py::arg("lr") = 1e-3, py::arg("w_data") = 1.0, py::arg("w_pde") = 1.0,
      py::arg("w_gp") = 1.0);

  py::class_<hmc::SampleChain>(m, "SampleChain")
      .def_readonly("draws", &hmc::SampleChain::draws)
      .def_readonly("names", &hmc::SampleChain::names)
      .def_readonly("accept_rate", &hmc::SampleChain::accept_rate)
      .def_readonly("adapted_step", &hmc::SampleChain::adapted_step)
      .def_readonly("potential", &hmc::SampleChain::potential)
      .def_readonly("ess", &hmc::SampleChain::ess);

  m.def(
      "run_hmc",
      [](const gp::ObservationSet& obs, const pde::ProblemSpec& problem,
         const pretrain::PretrainReport& report, int n_warmup, int n_samples,
         int leapfrog_steps, double step_size, double target_accept,
         unsigned long long seed, double log_psi_sd) {
        hmc::PriorSpec priors;
        priors.phi_lo = problem.phi_lo;
        priors.phi_hi = problem.phi_hi;
        priors.log_psi_center = report.psi_pre.pack();
        priors.log_psi_sd = log_psi_sd;
        hmc::HmcConfig cfg;
        cfg.n_warmup = n_warmup;
        cfg.n_samples = n_samples;
        cfg.leapfrog_steps = leapfrog_steps;
        cfg.step_size0 = step_size;
        cfg.target_accept = target_accept;
        cfg.seed = seed;
        return hmc::run_hmc(obs, feature_map_from_report(report),
                            report.psi_pre, report.phi_pre, priors, problem.op,
                            pde::StencilPolicy::for_kernels(problem.domain),
                            problem.phi_names, cfg);
      },
      py::arg("obs"), py::arg("problem"), py::arg("report"),
      py::arg("n_warmup") = 500, py::arg("n_samples") = 2000,
      py::arg("leapfrog_steps") = 20, py::arg("step_size") = 0.1,
      py::arg("target_accept") = 0.8, py::arg("seed") = 0,
      py::arg("log_psi_sd") = 0.5);

  py::class_<predict::MarginalSummary>(m, "MarginalSummary")
      .def_readonly("names", &predict::MarginalSummary::names)
      .def_readonly("mean", &predict::MarginalSummary::mean)
      .def_readonly("sd", &predict::MarginalSummary::sd)
      .def_readonly("ci_lo", &predict::MarginalSummary::ci_lo)
      .def_readonly("ci_hi", &predict::MarginalSummary::ci_hi)
      .def_readonly("covariance", &predict::MarginalSummary::covariance);

  m.def(
      "marginal_stats",
      [](const hmc::SampleChain& chain, int n_phi) {
        return predict::marginal_stats_phi(chain, n_phi);
      },
      py::arg("chain"), py::arg("n_phi"));

  py::class_<predict::PredictiveField>(m, "PredictiveField")
      .def_property_readonly(
          "points",
          [](const predict::PredictiveField& f) {
            return points_to_matrix(f.points);
          })
      .def_readonly("mean", &predict::PredictiveField::mean)
      .def_readonly("covariance", &predict::PredictiveField::covariance)
      .def_readonly("within_variance", &predict::PredictiveField::within_variance)
      .def_readonly("between_variance",
                    &predict::PredictiveField::between_variance)
      .def_readonly("draws_used", &predict::PredictiveField::draws_used)
      .def_readonly("draws_skipped", &predict::PredictiveField::draws_skipped);

  m.def(
      "bma_predict",
      [](const hmc::SampleChain& chain, int thin,
         const gp::ObservationSet& obs, const pretrain::PretrainReport& report,
         const pde::ProblemSpec& problem, const Mat& test_points) {
        return predict::bma_predict(
            chain, thin, obs, feature_map_from_report(report), problem.op,
            pde::StencilPolicy::for_kernels(problem.domain), problem.n_phi(),
            matrix_to_points(test_points));
      },
      py::arg("chain"), py::arg("thin"), py::arg("obs"), py::arg("report"),
      py::arg("problem"), py::arg("test_points"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& out_dir,
         bool quiet) {
        const auto cfg = cli::parse_config(config_json);
        cli::RunOptions opts;
        opts.out_dir_override = out_dir;
        opts.quiet = quiet;
        return cli::run_experiment(cfg, opts).manifest_path;
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("quiet") = true);
}
