#include "pidkl/cli/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

#include "pidkl/cli/sha256.hpp"
#include "pidkl/predict/bma.hpp"
#include "pidkl/predict/summary.hpp"

namespace pidkl::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r)));
  return rows;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string observations_csv(const gp::ObservationSet& obs, int dx) {
  std::ostringstream os;
  os << "kind,t";
  for (int c = 1; c <= dx; ++c) os << ",x_" << c;
  os << ",value\n";
  const auto row = [&](const char* kind, const Point& s, double v) {
    os << kind;
    for (int c = 0; c <= dx; ++c) os << ',' << fmt(s[c]);
    os << ',' << fmt(v) << '\n';
  };
  for (int i = 0; i < obs.n_u(); ++i) row("u", obs.s_u[i], obs.u[i]);
  for (int j = 0; j < obs.n_f(); ++j) row("f", obs.s_f[j], obs.f[j]);
  return os.str();
}

std::string chain_csv(const hmc::SampleChain& chain) {
  std::ostringstream os;
  for (std::size_t c = 0; c < chain.names.size(); ++c)
    os << (c ? "," : "") << chain.names[c];
  os << '\n';
  for (int r = 0; r < chain.n_draws(); ++r) {
    for (int c = 0; c < chain.dim(); ++c)
      os << (c ? "," : "") << fmt(chain.draws(r, c));
    os << '\n';
  }
  return os.str();
}

std::string field_csv(const predict::PredictiveField& field, int dx) {
  std::ostringstream os;
  os << 't';
  for (int c = 1; c <= dx; ++c) os << ",x_" << c;
  os << ",mean,variance\n";
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (int c = 0; c <= dx; ++c)
      os << (c ? "," : "") << fmt(field.points[i][c]);
    os << ',' << fmt(field.mean[ii]) << ','
       << fmt(field.covariance(ii, ii)) << '\n';
  }
  return os.str();
}

std::vector<Point> prediction_points(const ExperimentConfig& cfg,
                                     const Domain& domain) {
  if (cfg.grid.type == "grid") {
    if (domain.dx() != 1)
      throw std::invalid_argument(
          "predict.grid.type 'grid' needs a 1D spatial domain; use 'random'");
    const int n = cfg.grid.points_per_dim;
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n) * n);
    for (int it = 0; it < n; ++it)
      for (int ix = 0; ix < n; ++ix) {
        Point s(2);
        s[0] = domain.lo(0) + domain.range(0) * it / (n - 1.0);
        s[1] = domain.lo(1) + domain.range(1) * ix / (n - 1.0);
        pts.push_back(std::move(s));
      }
    return pts;
  }
  return pde::sample_interior(domain, cfg.grid.n_random, cfg.grid.seed);
}

class StageClock {
 public:
  explicit StageClock(bool quiet) : quiet_(quiet) {}

  template <typename F>
  auto time(const std::string& stage, F&& f) {
    if (!quiet_) std::cerr << "[pidkl] " << stage << "...\n";
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto result = f();
      const std::chrono::duration<double> dt =
          std::chrono::steady_clock::now() - t0;
      seconds_[stage] = dt.count();
      if (!quiet_)
        std::cerr << "[pidkl] " << stage << " done in " << dt.count()
                  << " s\n";
      return result;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

  const std::map<std::string, double>& seconds() const { return seconds_; }

 private:
  bool quiet_;
  std::map<std::string, double> seconds_;
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& config,
                         const RunOptions& options) {
  // Keep Eigen's own products single-threaded so reruns of one config are
  // byte-identical; parallelism lives in the FD gradient instead.
  Eigen::setNbThreads(1);
  ExperimentConfig cfg = config;
  if (options.out_dir_override) cfg.output_dir = *options.out_dir_override;
  if (options.seed_override) {
    cfg.data_seed = *options.seed_override;
    cfg.pretrain.seed = *options.seed_override + 1;
    cfg.hmc.seed = *options.seed_override + 2;
    cfg.grid.seed = *options.seed_override + 3;
  }

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  StageClock clock(options.quiet);

  const pde::ProblemSpec problem = clock.time(
      "setup", [&] { return pde::make_problem(cfg.problem_name, cfg.overrides); });
  const int dx = problem.dx();

  const gp::ObservationSet obs = clock.time("generate", [&] {
    auto o = pde::generate_observations(problem, cfg.n_u, cfg.n_f,
                                        cfg.data_seed, cfg.tau_u_sq,
                                        cfg.tau_f_sq);
    write_file(out_dir / "observations.csv", observations_csv(o, dx));
    return o;
  });

  const pretrain::PretrainReport report = clock.time("pretrain", [&] {
    auto rep = pretrain::run_pretraining(problem, obs, cfg.pretrain);
    json j;
    j["arch"] = rep.theta_fix.arch.widths;
    j["theta"] = vec_to_json(rep.theta_fix.flatten());
    j["psi_pre"] = {{"log_sf2", rep.psi_pre.log_sf2},
                    {"log_len", vec_to_json(rep.psi_pre.log_len)}};
    j["phi_pre"] = vec_to_json(rep.phi_pre);
    j["iterations"] = rep.iterations;
    j["seed"] = rep.seed;
    json trace = json::array();
    for (const auto& row : rep.trace)
      trace.push_back({row[0], row[1], row[2], row[3]});
    j["trace"] = std::move(trace);
    write_file(out_dir / "pretrain.json", j.dump(2) + "\n");
    return rep;
  });

  kernel::FeatureMap theta_fix;
  theta_fix.net = report.theta_fix;
  theta_fix.scaler = report.scaler;
  const pde::StencilPolicy kernel_policy =
      pde::StencilPolicy::for_kernels(problem.domain);

  hmc::PriorSpec priors;
  priors.phi_lo = problem.phi_lo;
  priors.phi_hi = problem.phi_hi;
  priors.log_psi_center = report.psi_pre.pack();
  priors.log_psi_sd = cfg.log_psi_sd;

  const hmc::SampleChain chain = clock.time("hmc", [&] {
    auto ch = hmc::run_hmc(obs, theta_fix, report.psi_pre, report.phi_pre,
                           priors, problem.op, kernel_policy,
                           problem.phi_names, cfg.hmc);
    write_file(out_dir / "chain.csv", chain_csv(ch));
    return ch;
  });

  const predict::MarginalSummary summary = clock.time("summarize", [&] {
    auto s = predict::marginal_stats_phi(chain, problem.n_phi());
    json j;
    json params = json::array();
    for (int i = 0; i < s.mean.size(); ++i)
      params.push_back({{"name", s.names[i]},
                        {"mean", s.mean[i]},
                        {"sd", s.sd[i]},
                        {"q025", s.ci_lo[i]},
                        {"q975", s.ci_hi[i]}});
    j["params"] = std::move(params);
    j["mean_vector"] = vec_to_json(s.mean);
    j["covariance"] = mat_to_json(s.covariance);
    write_file(out_dir / "summary.json", j.dump(2) + "\n");
    return s;
  });
  (void)summary;

  const predict::PredictiveField field = clock.time("predict", [&] {
    const std::vector<Point> pts = prediction_points(cfg, problem.domain);
    auto f = predict::bma_predict(chain, cfg.bma_thin, obs, theta_fix,
                                  problem.op, kernel_policy, problem.n_phi(),
                                  pts);
    write_file(out_dir / "field.csv", field_csv(f, dx));
    return f;
  });

  {
    json j;
    j["acceptance_rate"] = chain.accept_rate;
    j["warmup_acceptance_rate"] = chain.warmup_accept;
    j["adapted_step_size"] = chain.adapted_step;
    j["one_sided_fd_fallbacks"] = chain.one_sided_fallbacks;
    j["seed"] = chain.seed;
    json ess = json::object();
    for (int c = 0; c < chain.dim(); ++c) ess[chain.names[c]] = chain.ess[c];
    j["ess"] = std::move(ess);
    j["bma"] = {{"draws_used", field.draws_used},
                {"draws_skipped", field.draws_skipped}};
    write_file(out_dir / "diagnostics.json", j.dump(2) + "\n");
  }

  // Manifest last: hashes cover every artifact written above.
  json manifest;
  manifest["version"] = "0.1.0";
  manifest["config"] = json::parse(config_to_json(cfg));
  json files = json::object();
  for (const char* name :
       {"observations.csv", "pretrain.json", "chain.csv", "diagnostics.json",
        "summary.json", "field.csv"})
    files[name] = sha256_file((out_dir / name).string());
  manifest["files"] = std::move(files);
  json wall = json::object();
  for (const auto& [stage, sec] : clock.seconds()) wall[stage] = sec;
  manifest["wall_clock_seconds"] = std::move(wall);
  const fs::path manifest_path = out_dir / "manifest.json";
  write_file(manifest_path, manifest.dump(2) + "\n");

  RunResult res;
  res.out_dir = out_dir.string();
  res.manifest_path = manifest_path.string();
  return res;
}

}  // namespace pidkl::cli
