#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srlab/experiment.hpp"
#include "srlab/io.hpp"
#include "srlab/rng.hpp"

using ordered_json = nlohmann::ordered_json;

namespace {

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
  Eigen::VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::map<std::string, std::string> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--param", "expected key=value, got: " + kv);
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

int run_distance(const std::string& model_name, const std::vector<std::string>& params,
                 const std::string& from, const std::string& to, int restarts, int grid,
                 std::uint64_t seed, int workers, const std::string& path_out) {
  const srlab::VectorFieldModel model = srlab::make_model(model_name, parse_params(params));
  const Eigen::VectorXd x = parse_vector(from);
  const Eigen::VectorXd y = parse_vector(to);
  if (x.size() != model.dim_m || y.size() != model.dim_m)
    throw CLI::ValidationError("--from/--to", "expected " + std::to_string(model.dim_m) +
                                                  " comma-separated coordinates");

  srlab::OptimizerOptions opts;
  opts.restarts = restarts;
  opts.grid_K = grid;
  opts.seed = seed;
  opts.workers = workers;
  const srlab::GeodesicResult res = srlab::minimize_energy(model, x, y, opts);

  ordered_json j;
  j["model"] = model.name;
  j["x"] = vector_json(x);
  j["y"] = vector_json(y);
  j["distance"] = res.distance_estimate;
  j["energy"] = res.energy;
  j["endpoint_gap"] = res.endpoint_gap;
  j["converged"] = res.converged;
  j["unique_minimizer"] = res.unique_minimizer;
  j["near_optima"] = res.near_optima.size();
  j["restarts"] = restarts;
  j["grid_K"] = grid;
  if (model.distance_oracle) {
    if (const auto d = model.distance_oracle(x, y)) j["oracle"] = *d;
  }
  std::cout << j.dump(2) << "\n";

  if (!path_out.empty()) srlab::write_path_csv(res.path, path_out);
  return 0;
}

int run_simulate(const std::string& model_name, const std::vector<std::string>& params,
                 const std::string& start, double eps, int steps, std::uint64_t seed, bool drift,
                 const std::string& out) {
  const srlab::VectorFieldModel model = srlab::make_model(model_name, parse_params(params));
  Eigen::VectorXd x0 =
      start.empty() ? Eigen::VectorXd::Zero(model.dim_m).eval() : parse_vector(start);
  if (x0.size() != model.dim_m)
    throw CLI::ValidationError("--start", "expected " + std::to_string(model.dim_m) +
                                              " comma-separated coordinates");
  srlab::SimConfig cfg;
  cfg.epsilon = eps;
  cfg.steps_N = steps;
  cfg.seed = seed;
  cfg.drift_on = drift;
  const srlab::Path path = srlab::simulate(model, x0, cfg);
  srlab::write_path_csv(path, out);

  ordered_json j;
  j["model"] = model.name;
  j["eps"] = eps;
  j["steps"] = steps;
  j["seed"] = seed;
  j["endpoint"] = vector_json(path.endpoint());
  j["path_csv"] = out;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_bridge(const std::string& model_name, const std::vector<std::string>& params,
               const std::string& from, const std::string& to, double eps, int steps,
               std::uint64_t seed, double radius, long long target_count,
               long long max_proposals, int workers, const std::string& out_dir) {
  const srlab::VectorFieldModel model = srlab::make_model(model_name, parse_params(params));
  const Eigen::VectorXd x = parse_vector(from);
  const Eigen::VectorXd y = parse_vector(to);
  if (x.size() != model.dim_m || y.size() != model.dim_m)
    throw CLI::ValidationError("--from/--to", "expected " + std::to_string(model.dim_m) +
                                                  " comma-separated coordinates");
  srlab::SimConfig cfg;
  cfg.epsilon = eps;
  cfg.steps_N = steps;
  cfg.seed = seed;
  cfg.workers = workers;
  const srlab::BridgeEnsemble ens =
      srlab::sample_bridge(model, x, y, cfg, radius, max_proposals, target_count);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  for (std::size_t i = 0; i < ens.paths.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "path_%06zu.csv", i);
    srlab::write_path_csv(ens.paths[i], (dir / name).string());
  }

  ordered_json meta;
  meta["x"] = vector_json(ens.x);
  meta["y"] = vector_json(ens.y);
  meta["eps"] = ens.epsilon;
  meta["seed"] = ens.seed;
  meta["acceptance_rate"] = ens.acceptance_rate;
  meta["ball_radius"] = ens.ball_radius;
  meta["num_proposals"] = ens.num_proposals;
  meta["steps_N"] = ens.steps_N;
  meta["count"] = ens.paths.size();
  std::ofstream metaf(dir / "meta.json");
  metaf << meta.dump(2) << "\n";
  metaf.close();

  std::cout << meta.dump(2) << "\n";
  return 0;
}

int run_holder(const std::string& input, double alpha, int window_n,
               const std::string& periodic) {
  const srlab::Path path = srlab::read_path_csv(input);
  std::vector<int> periodic_dims;
  if (!periodic.empty()) {
    std::stringstream ss(periodic);
    std::string cell;
    while (std::getline(ss, cell, ','))
      periodic_dims.push_back(static_cast<int>(std::strtol(cell.c_str(), nullptr, 10)));
  }
  const srlab::HolderStats st = srlab::holder_stats(path.points, alpha, window_n, periodic_dims);
  ordered_json j;
  j["alpha"] = st.alpha;
  j["full_norm"] = st.full_norm;
  j["window_norm"] = st.window_norm;
  j["window_n"] = st.window_n;
  j["coarsened"] = st.coarsened;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_experiment(const std::string& name, const std::string& config_file,
                   const std::string& out_dir, std::uint64_t seed, bool seed_set, int workers,
                   bool workers_set) {
  srlab::ExperimentConfig cfg = srlab::load_config(config_file);
  if (seed_set) cfg.seed = seed;
  if (workers_set) cfg.workers = workers;

  const srlab::VectorFieldModel model = srlab::make_model(cfg.model_name, cfg.model_params);
  if (cfg.x.size() == 0) cfg.x = Eigen::VectorXd::Zero(model.dim_m);
  if (cfg.y.size() == 0) cfg.y = Eigen::VectorXd::Zero(model.dim_m);
  if (cfg.x.size() != model.dim_m || cfg.y.size() != model.dim_m)
    throw std::invalid_argument("config x/y dimension does not match the model");
  if (cfg.eps_grid.empty()) throw std::invalid_argument("config needs a non-empty eps_grid");

  srlab::ExperimentReport report;
  if (name == "leandre") {
    report = srlab::run_leandre(model, cfg.x, cfg.y, cfg.eps_grid, cfg);
  } else if (name == "tube") {
    srlab::Path gamma;
    if (!cfg.gamma_csv.empty()) {
      gamma = srlab::read_path_csv(cfg.gamma_csv);
    } else {
      srlab::OptimizerOptions opt = cfg.opt;
      opt.seed = srlab::derive_seed(cfg.seed, 777);
      opt.workers = cfg.workers;
      const srlab::GeodesicResult geo = srlab::minimize_energy(model, cfg.x, cfg.y, opt);
      if (!geo.converged) throw std::runtime_error("reference geodesic did not converge");
      gamma = geo.path;
    }
    report = srlab::run_tube(model, cfg.x, cfg.y, gamma, cfg.tube_radius, cfg.eps_grid, cfg);
  } else if (name == "concentration") {
    report = srlab::run_concentration(model, cfg.x, cfg.y, cfg.eps_grid, cfg.delta, cfg);
  } else if (name == "tightness") {
    report = srlab::run_tightness(model, cfg.x, cfg.y, cfg.eps_grid, cfg.alpha, cfg.window_n,
                                  cfg.K_threshold, cfg);
  } else {  // reversal
    const double eps = cfg.eps_grid.front();
    if (cfg.eps_second == 0.0 && cfg.eps_grid.size() > 1) cfg.eps_second = cfg.eps_grid[1];
    report = srlab::run_reversal(model, cfg.x, cfg.y, eps, cfg);
  }

  srlab::emit_report(report, out_dir);
  std::cout << name << ": " << report.verdict << " (report in " << out_dir << ")\n";
  if (report.verdict == "pass") return 0;
  if (report.verdict == "fail") return 2;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for hypoelliptic diffusions and sub-Riemannian geometry"};
  app.require_subcommand(1);

  std::string model_name = "heisenberg";
  std::vector<std::string> params;
  std::string from, to, start, input, out, config_file;
  int restarts = 8, grid = 64, steps = 128, window_n = 8, workers = 1;
  std::uint64_t seed = 1;
  double eps = 0.1, radius = 0.1, alpha = 0.4;
  long long target_count = 0, max_proposals = 1000000;
  bool drift = false;
  std::string periodic;

  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--model", model_name, "model name (heisenberg, torus_hypo, custom)");
    sub->add_option("--param", params, "custom model parameter key=value (repeatable)");
  };

  CLI::App* dist = app.add_subcommand("distance", "Carnot-Caratheodory distance by energy minimization");
  add_model_flags(dist);
  dist->add_option("--from", from, "start point, comma-separated")->required();
  dist->add_option("--to", to, "end point, comma-separated")->required();
  dist->add_option("--restarts", restarts, "optimizer restarts");
  dist->add_option("--grid", grid, "control grid size K");
  dist->add_option("--seed", seed, "master seed");
  dist->add_option("--workers", workers, "parallel workers");

  CLI::App* geo = app.add_subcommand("geodesic", "minimize energy and write the path CSV");
  add_model_flags(geo);
  geo->add_option("--from", from, "start point, comma-separated")->required();
  geo->add_option("--to", to, "end point, comma-separated")->required();
  geo->add_option("--restarts", restarts, "optimizer restarts");
  geo->add_option("--grid", grid, "control grid size K");
  geo->add_option("--seed", seed, "master seed");
  geo->add_option("--workers", workers, "parallel workers");
  geo->add_option("--out", out, "path CSV output")->default_val("geodesic.csv");

  CLI::App* sim = app.add_subcommand("simulate", "one diffusion trajectory");
  add_model_flags(sim);
  sim->add_option("--start", start, "start point (default origin)");
  sim->add_option("--eps", eps, "noise scale");
  sim->add_option("--steps", steps, "time steps N");
  sim->add_option("--seed", seed, "master seed");
  sim->add_flag("--drift", drift, "include the drift field");
  sim->add_option("--out", out, "path CSV output")->default_val("path.csv");

  CLI::App* bridge = app.add_subcommand("bridge", "rejection-sampled bridge ensemble");
  add_model_flags(bridge);
  bridge->add_option("--from", from, "start point")->required();
  bridge->add_option("--to", to, "end point")->required();
  bridge->add_option("--eps", eps, "noise scale");
  bridge->add_option("--steps", steps, "time steps N");
  bridge->add_option("--seed", seed, "master seed");
  bridge->add_option("--radius", radius, "acceptance ball radius")->required();
  bridge->add_option("--target-count", target_count, "stop after this many acceptances");
  bridge->add_option("--max-proposals", max_proposals, "proposal budget");
  bridge->add_option("--workers", workers, "parallel workers");
  bridge->add_option("--out", out, "ensemble directory")->default_val("bridge_out");

  CLI::App* holder = app.add_subcommand("holder", "Holder statistics of a path CSV");
  holder->add_option("--input", input, "path CSV")->required();
  holder->add_option("--alpha", alpha, "Holder exponent");
  holder->add_option("--window-n", window_n, "window parameter n (pairs with t-s <= 1/n)");
  holder->add_option("--periodic", periodic, "comma-separated periodic coordinate indices");

  bool seed_set = false, workers_set = false;
  std::vector<std::string> experiment_names = {"leandre", "tube", "concentration", "tightness",
                                               "reversal"};
  std::map<std::string, CLI::App*> experiment_subs;
  for (const std::string& name : experiment_names) {
    CLI::App* sub = app.add_subcommand(name, name + " experiment");
    sub->add_option("--config", config_file, "experiment config JSON")->required();
    sub->add_option("--out", out, "report directory")->default_val("out_" + name);
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--workers", workers, "override the config worker count")
        ->each([&](const std::string&) { workers_set = true; });
    experiment_subs[name] = sub;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (dist->parsed())
      return run_distance(model_name, params, from, to, restarts, grid, seed, workers, "");
    if (geo->parsed())
      return run_distance(model_name, params, from, to, restarts, grid, seed, workers, out);
    if (sim->parsed())
      return run_simulate(model_name, params, start, eps, steps, seed, drift, out);
    if (bridge->parsed())
      return run_bridge(model_name, params, from, to, eps, steps, seed, radius, target_count,
                        max_proposals, workers, out);
    if (holder->parsed()) return run_holder(input, alpha, window_n, periodic);
    for (const auto& [name, sub] : experiment_subs)
      if (sub->parsed())
        return run_experiment(name, config_file, out, seed, seed_set, workers, workers_set);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
