#include "pidkl/cli/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace pidkl::cli {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& root, std::vector<std::string>& defaulted)
      : root_(root), defaulted_(defaulted) {}

  const json* find(const std::string& dotted) const {
    const json* node = &root_;
    std::istringstream path(dotted);
    std::string part;
    while (std::getline(path, part, '.')) {
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &(*node)[part];
    }
    return node;
  }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    const json* node = find(key);
    if (!node) {
      defaulted_.push_back(key);
      return fallback;
    }
    return convert<T>(*node, key);
  }

  template <typename T>
  T require(const std::string& key) {
    const json* node = find(key);
    if (!node) throw ConfigError(key, "required field is missing");
    return convert<T>(*node, key);
  }

  template <typename T>
  static T convert(const json& node, const std::string& key) {
    try {
      return node.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key, "wrong type");
    }
  }

 private:
  const json& root_;
  std::vector<std::string>& defaulted_;
};

void check_positive(long long v, const std::string& key) {
  if (v <= 0) throw ConfigError(key, "must be positive");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<document>", "must be an object");

  ExperimentConfig cfg;
  Reader r(root, cfg.defaulted);

  cfg.problem_name = r.require<std::string>("problem.name");
  if (cfg.problem_name != "heat1d" && cfg.problem_name != "heat50d" &&
      cfg.problem_name != "adr50d")
    throw ConfigError("problem.name", "unknown problem '" + cfg.problem_name +
                                          "' (heat1d, heat50d, adr50d)");
  if (const json* d = r.find("problem.dimension")) {
    const int dim = Reader::convert<int>(*d, "problem.dimension");
    if (dim < 1) throw ConfigError("problem.dimension", "must be positive");
    cfg.overrides.dimension = dim;
  }
  if (const json* pt = r.find("problem.phi_true")) {
    const auto v = Reader::convert<std::vector<double>>(*pt, "problem.phi_true");
    cfg.overrides.phi_true = Eigen::Map<const Vec>(v.data(), v.size());
  }

  cfg.n_u = r.get<int>("observations.n_u", cfg.n_u);
  check_positive(cfg.n_u, "observations.n_u");
  cfg.n_f = r.get<int>("observations.n_f", cfg.n_f);
  if (cfg.n_f < 0) throw ConfigError("observations.n_f", "must be >= 0");
  cfg.tau_u_sq = r.get<double>("observations.tau_u_sq", cfg.tau_u_sq);
  cfg.tau_f_sq = r.get<double>("observations.tau_f_sq", cfg.tau_f_sq);
  if (!(cfg.tau_u_sq > 0.0))
    throw ConfigError("observations.tau_u_sq", "must be positive");
  if (!(cfg.tau_f_sq > 0.0))
    throw ConfigError("observations.tau_f_sq", "must be positive");
  cfg.data_seed = r.get<unsigned long long>("observations.seed", cfg.data_seed);

  cfg.pretrain.n_col = r.get<int>("pretrain.n_col", 100);
  check_positive(cfg.pretrain.n_col, "pretrain.n_col");
  cfg.pretrain.n_iter = r.get<int>("pretrain.n_iter", 2000);
  if (cfg.pretrain.n_iter < 0)
    throw ConfigError("pretrain.n_iter", "must be >= 0");
  cfg.pretrain.seed = r.get<unsigned long long>("pretrain.seed", 202);
  cfg.pretrain.weights.data = r.get<double>("pretrain.weights.data", 1.0);
  cfg.pretrain.weights.pde = r.get<double>("pretrain.weights.pde", 1.0);
  cfg.pretrain.weights.gp = r.get<double>("pretrain.weights.gp", 1.0);
  try {
    cfg.pretrain.weights.validate();
  } catch (const std::exception& e) {
    throw ConfigError("pretrain.weights", e.what());
  }
  cfg.pretrain.adam.lr = r.get<double>("pretrain.adam.lr", 1e-3);
  cfg.pretrain.adam.beta1 = r.get<double>("pretrain.adam.beta1", 0.9);
  cfg.pretrain.adam.beta2 = r.get<double>("pretrain.adam.beta2", 0.999);
  cfg.pretrain.adam.eps = r.get<double>("pretrain.adam.eps", 1e-8);
  if (!(cfg.pretrain.adam.lr > 0.0))
    throw ConfigError("pretrain.adam.lr", "must be positive");
  cfg.pretrain.hidden = r.get<std::vector<int>>("pretrain.hidden", {32, 32});
  if (cfg.pretrain.hidden.empty())
    throw ConfigError("pretrain.hidden", "need at least one hidden layer");
  cfg.pretrain.latent_dim = r.get<int>("pretrain.latent_dim", 2);
  check_positive(cfg.pretrain.latent_dim, "pretrain.latent_dim");

  cfg.hmc.n_warmup = r.get<int>("hmc.n_warmup", 1500);
  if (cfg.hmc.n_warmup < 0) throw ConfigError("hmc.n_warmup", "must be >= 0");
  cfg.hmc.n_samples = r.get<int>("hmc.n_samples", 8500);
  check_positive(cfg.hmc.n_samples, "hmc.n_samples");
  cfg.hmc.leapfrog_steps = r.get<int>("hmc.leapfrog_steps", 20);
  check_positive(cfg.hmc.leapfrog_steps, "hmc.leapfrog_steps");
  cfg.hmc.step_size0 = r.get<double>("hmc.step_size", 0.1);
  if (!(cfg.hmc.step_size0 > 0.0))
    throw ConfigError("hmc.step_size", "must be positive");
  cfg.hmc.target_accept = r.get<double>("hmc.target_accept", 0.8);
  if (!(cfg.hmc.target_accept > 0.4 && cfg.hmc.target_accept < 0.99))
    throw ConfigError("hmc.target_accept", "must be in (0.4, 0.99)");
  cfg.hmc.seed = r.get<unsigned long long>("hmc.seed", 303);
  cfg.log_psi_sd = r.get<double>("hmc.log_psi_sd", 0.5);
  if (!(cfg.log_psi_sd > 0.0))
    throw ConfigError("hmc.log_psi_sd", "must be positive");

  cfg.grid.type = r.get<std::string>("predict.grid.type", "grid");
  if (cfg.grid.type != "grid" && cfg.grid.type != "random")
    throw ConfigError("predict.grid.type", "must be 'grid' or 'random'");
  cfg.grid.points_per_dim = r.get<int>("predict.grid.points_per_dim", 21);
  check_positive(cfg.grid.points_per_dim, "predict.grid.points_per_dim");
  cfg.grid.n_random = r.get<int>("predict.grid.n", 200);
  check_positive(cfg.grid.n_random, "predict.grid.n");
  cfg.grid.seed = r.get<unsigned long long>("predict.grid.seed", 7);
  cfg.bma_thin = r.get<int>("predict.thin", 10);
  check_positive(cfg.bma_thin, "predict.thin");

  cfg.output_dir = r.get<std::string>("output_dir", "out");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"]["name"] = cfg.problem_name;
  if (cfg.overrides.dimension)
    j["problem"]["dimension"] = *cfg.overrides.dimension;
  if (cfg.overrides.phi_true) {
    std::vector<double> v(cfg.overrides.phi_true->data(),
                          cfg.overrides.phi_true->data() +
                              cfg.overrides.phi_true->size());
    j["problem"]["phi_true"] = v;
  }
  j["observations"] = {{"n_u", cfg.n_u},
                       {"n_f", cfg.n_f},
                       {"tau_u_sq", cfg.tau_u_sq},
                       {"tau_f_sq", cfg.tau_f_sq},
                       {"seed", cfg.data_seed}};
  j["pretrain"] = {{"n_col", cfg.pretrain.n_col},
                   {"n_iter", cfg.pretrain.n_iter},
                   {"seed", cfg.pretrain.seed},
                   {"weights",
                    {{"data", cfg.pretrain.weights.data},
                     {"pde", cfg.pretrain.weights.pde},
                     {"gp", cfg.pretrain.weights.gp}}},
                   {"adam",
                    {{"lr", cfg.pretrain.adam.lr},
                     {"beta1", cfg.pretrain.adam.beta1},
                     {"beta2", cfg.pretrain.adam.beta2},
                     {"eps", cfg.pretrain.adam.eps}}},
                   {"hidden", cfg.pretrain.hidden},
                   {"latent_dim", cfg.pretrain.latent_dim}};
  j["hmc"] = {{"n_warmup", cfg.hmc.n_warmup},
              {"n_samples", cfg.hmc.n_samples},
              {"leapfrog_steps", cfg.hmc.leapfrog_steps},
              {"step_size", cfg.hmc.step_size0},
              {"target_accept", cfg.hmc.target_accept},
              {"seed", cfg.hmc.seed},
              {"log_psi_sd", cfg.log_psi_sd}};
  j["predict"] = {{"grid",
                   {{"type", cfg.grid.type},
                    {"points_per_dim", cfg.grid.points_per_dim},
                    {"n", cfg.grid.n_random},
                    {"seed", cfg.grid.seed}}},
                  {"thin", cfg.bma_thin}};
  j["output_dir"] = cfg.output_dir;
  return j.dump(2);
}

}  // namespace pidkl::cli
