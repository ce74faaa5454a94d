#include "srlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace srlab {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << text;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const ordered_json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

ordered_json map_to_json(const std::map<std::string, double>& m) {
  ordered_json obj = ordered_json::object();
  for (const auto& [k, v] : m) obj[k] = v;
  return obj;
}

ordered_json map_to_json(const std::map<std::string, std::string>& m) {
  ordered_json obj = ordered_json::object();
  for (const auto& [k, v] : m) obj[k] = v;
  return obj;
}

}  // namespace

void write_path_csv(const Path& path, const std::string& file) {
  std::ostringstream out;
  out << "t";
  for (Eigen::Index c = 0; c < path.points.cols(); ++c) out << ",x" << c;
  out << "\n";
  const int K = path.grid_K;
  for (int k = 0; k <= K; ++k) {
    out << format_g17(static_cast<double>(k) / K);
    for (Eigen::Index c = 0; c < path.points.cols(); ++c)
      out << "," << format_g17(path.points(k, c));
    out << "\n";
  }
  write_file(file, out.str());
}

Path read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty path file: " + file);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() < 2) throw std::runtime_error("malformed path row: " + line);
    rows.push_back(row);
  }
  if (rows.size() < 2) throw std::runtime_error("path file needs at least two rows: " + file);
  const std::size_t m = rows[0].size() - 1;  // first column is t
  Path p;
  p.grid_K = static_cast<int>(rows.size()) - 1;
  p.points.resize(rows.size(), m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m + 1) throw std::runtime_error("ragged path file: " + file);
    for (std::size_t c = 0; c < m; ++c) p.points(r, c) = rows[r][c + 1];
  }
  return p;
}

void write_control_csv(const Control& h, const std::string& file) {
  std::ostringstream out;
  out << "t";
  for (Eigen::Index c = 0; c < h.values.cols(); ++c) out << ",h" << c;
  out << "\n";
  const int K = h.grid_K;
  for (int k = 0; k <= K; ++k) {
    out << format_g17(static_cast<double>(k) / K);
    for (Eigen::Index c = 0; c < h.values.cols(); ++c) out << "," << format_g17(h.values(k, c));
    out << "\n";
  }
  write_file(file, out.str());
}

bool ExperimentReport::operator==(const ExperimentReport& o) const {
  auto veq = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() && a == b;
  };
  return experiment == o.experiment && model_name == o.model_name && veq(x, o.x) && veq(y, o.y) &&
         eps_grid == o.eps_grid && estimates == o.estimates && fit == o.fit && seed == o.seed &&
         runtime_s == o.runtime_s && verdict == o.verdict && tolerance == o.tolerance &&
         metrics == o.metrics && notes == o.notes;
}

std::string report_to_json(const ExperimentReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["model"] = r.model_name;
  j["x"] = vector_to_json(r.x);
  j["y"] = vector_to_json(r.y);
  j["eps_grid"] = r.eps_grid;

  ordered_json ests = ordered_json::array();
  for (const EstimateRecord& e : r.estimates) {
    ordered_json je;
    je["eps"] = e.eps;
    je["value"] = e.value;
    je["std_error"] = e.std_error;
    je["sample_size"] = e.sample_size;
    je["flagged"] = e.flagged;
    je["extras"] = map_to_json(e.extras);
    ests.push_back(std::move(je));
  }
  j["estimates"] = std::move(ests);

  if (r.fit) {
    ordered_json jf;
    jf["model"] = r.fit->model;
    jf["slope"] = r.fit->slope;
    jf["intercept"] = r.fit->intercept;
    jf["target"] = r.fit->target;
    jf["relative_error"] = r.fit->relative_error;
    jf["extras"] = map_to_json(r.fit->extras);
    j["fit"] = std::move(jf);
  } else {
    j["fit"] = nullptr;
  }

  j["seed"] = r.seed;
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.verdict;
  j["metrics"] = map_to_json(r.metrics);
  j["notes"] = map_to_json(r.notes);
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  ExperimentReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.model_name = j.at("model").get<std::string>();
  r.x = vector_from_json(j.at("x"));
  r.y = vector_from_json(j.at("y"));
  r.eps_grid = j.at("eps_grid").get<std::vector<double>>();
  for (const auto& je : j.at("estimates")) {
    EstimateRecord e;
    e.eps = je.at("eps").get<double>();
    e.value = je.at("value").get<double>();
    e.std_error = je.at("std_error").get<double>();
    e.sample_size = je.at("sample_size").get<long long>();
    e.flagged = je.at("flagged").get<bool>();
    e.extras = je.at("extras").get<std::map<std::string, double>>();
    r.estimates.push_back(std::move(e));
  }
  if (!j.at("fit").is_null()) {
    const auto& jf = j.at("fit");
    FitRecord f;
    f.model = jf.at("model").get<std::string>();
    f.slope = jf.at("slope").get<double>();
    f.intercept = jf.at("intercept").get<double>();
    f.target = jf.at("target").get<double>();
    f.relative_error = jf.at("relative_error").get<double>();
    f.extras = jf.at("extras").get<std::map<std::string, double>>();
    r.fit = std::move(f);
  }
  r.seed = j.at("seed").get<std::uint64_t>();
  r.tolerance = j.at("tolerance").get<double>();
  r.verdict = j.at("verdict").get<std::string>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  r.notes = j.at("notes").get<std::map<std::string, std::string>>();
  return r;
}

std::string render_curves_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "eps,estimate,stderr\n";
  for (const EstimateRecord& e : r.estimates)
    out << format_g17(e.eps) << "," << format_g17(e.value) << "," << format_g17(e.std_error)
        << "\n";
  return out.str();
}

std::string render_plot_svg(const ExperimentReport& r) {
  const double W = 640, H = 480, M = 60;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (!r.estimates.empty()) {
    xmax = 0.0;
    ymin = std::numeric_limits<double>::infinity();
    ymax = -ymin;
    for (const EstimateRecord& e : r.estimates) {
      xmax = std::max(xmax, e.eps);
      ymin = std::min(ymin, e.value);
      ymax = std::max(ymax, e.value);
    }
    if (r.fit) {
      ymin = std::min({ymin, r.fit->intercept, r.fit->target});
      ymax = std::max({ymax, r.fit->intercept, r.fit->target});
    }
    if (ymax <= ymin) {
      ymin -= 1.0;
      ymax += 1.0;
    }
    const double pad = 0.08 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    xmax *= 1.05;
  }

  auto sx = [&](double v) { return M + (v - xmin) / (xmax - xmin) * (W - 2 * M); };
  auto sy = [&](double v) { return H - M - (v - ymin) / (ymax - ymin) * (H - 2 * M); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  // axes drawn as a single path so line elements stay reserved for the fit
  out << "<path d=\"M " << fmt(M) << " " << fmt(M) << " L " << fmt(M) << " " << fmt(H - M)
      << " L " << fmt(W - M) << " " << fmt(H - M) << "\" stroke=\"black\" fill=\"none\"/>\n";
  out << "<text x=\"" << fmt(W / 2) << "\" y=\"" << fmt(H - M / 3)
      << "\" text-anchor=\"middle\" font-size=\"14\">eps</text>\n";
  out << "<text x=\"" << fmt(M / 3) << "\" y=\"" << fmt(H / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 " << fmt(M / 3) << " "
      << fmt(H / 2) << ")\">" << r.experiment << "</text>\n";

  for (const EstimateRecord& e : r.estimates)
    out << "<circle cx=\"" << fmt(sx(e.eps)) << "\" cy=\"" << fmt(sy(e.value))
        << "\" r=\"3\" fill=\"" << (e.flagged ? "gray" : "steelblue") << "\"/>\n";

  if (r.fit) {
    const double eps_hi = r.eps_grid.empty() ? xmax : r.eps_grid.front();
    double y_hi = r.fit->intercept + r.fit->slope * eps_hi;
    if (r.fit->model == "prefactor") {
      const auto it_lin = r.fit->extras.find("log_coefficient");
      const double c_log = it_lin == r.fit->extras.end() ? 0.0 : it_lin->second;
      y_hi = r.fit->intercept + r.fit->slope * eps_hi + c_log * eps_hi * std::log(eps_hi);
    }
    out << "<line x1=\"" << fmt(sx(0.0)) << "\" y1=\"" << fmt(sy(r.fit->intercept)) << "\" x2=\""
        << fmt(sx(eps_hi)) << "\" y2=\"" << fmt(sy(y_hi))
        << "\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    out << "<line x1=\"" << fmt(sx(xmin)) << "\" y1=\"" << fmt(sy(r.fit->target)) << "\" x2=\""
        << fmt(sx(xmax)) << "\" y2=\"" << fmt(sy(r.fit->target))
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_report(const ExperimentReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file((dir / "report.json").string(), report_to_json(report));
  write_file((dir / "curves.csv").string(), render_curves_csv(report));
  write_file((dir / "plot.svg").string(), render_plot_svg(report));
  ordered_json timing;
  timing["runtime_s"] = report.runtime_s;
  write_file((dir / "timing.json").string(), timing.dump(2) + "\n");
}

ExperimentReport parse_report(const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  ExperimentReport r = report_from_json(read_file((dir / "report.json").string()));
  const auto timing_file = dir / "timing.json";
  if (std::filesystem::exists(timing_file)) {
    const ordered_json t = ordered_json::parse(read_file(timing_file.string()));
    if (t.contains("runtime_s")) r.runtime_s = t["runtime_s"].get<double>();
  }
  return r;
}

ExperimentConfig parse_config_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("model")) cfg.model_name = j["model"].get<std::string>();
  if (j.contains("model_params"))
    cfg.model_params = j["model_params"].get<std::map<std::string, std::string>>();
  if (j.contains("x")) cfg.x = vector_from_json(j["x"]);
  if (j.contains("y")) cfg.y = vector_from_json(j["y"]);
  if (j.contains("eps_grid")) cfg.eps_grid = j["eps_grid"].get<std::vector<double>>();
  if (j.contains("samples_per_eps")) cfg.samples_per_eps = j["samples_per_eps"].get<long long>();
  if (j.contains("target_accepted")) {
    if (j["target_accepted"].is_array())
      cfg.target_accepted = j["target_accepted"].get<std::vector<long long>>();
    else
      cfg.target_accepted = {j["target_accepted"].get<long long>()};
  }
  if (j.contains("max_proposals")) cfg.max_proposals = j["max_proposals"].get<long long>();
  if (j.contains("steps_N")) cfg.steps_N = j["steps_N"].get<int>();
  if (j.contains("ball_radius_rule"))
    cfg.ball_radius_factor = j["ball_radius_rule"].get<double>();
  if (j.contains("ball_radius_factor"))
    cfg.ball_radius_factor = j["ball_radius_factor"].get<double>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("window_n")) cfg.window_n = j["window_n"].get<int>();
  if (j.contains("K_threshold")) cfg.K_threshold = j["K_threshold"].get<double>();
  if (j.contains("thresholds")) cfg.thresholds = j["thresholds"].get<std::vector<double>>();
  if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
  if (j.contains("tube_radius")) cfg.tube_radius = j["tube_radius"].get<double>();
  if (j.contains("eps_second")) cfg.eps_second = j["eps_second"].get<double>();
  if (j.contains("fit_model")) cfg.fit_model = j["fit_model"].get<std::string>();
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (t.contains("relative")) cfg.tol_relative = t["relative"].get<double>();
    if (t.contains("rate")) cfg.tol_rate = t["rate"].get<double>();
    if (t.contains("floor")) cfg.tol_floor = t["floor"].get<double>();
    if (t.contains("absolute")) cfg.tol_absolute = t["absolute"].get<double>();
    if (t.contains("p_threshold")) cfg.p_threshold = t["p_threshold"].get<double>();
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  if (j.contains("gamma_csv")) cfg.gamma_csv = j["gamma_csv"].get<std::string>();
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    if (o.contains("restarts")) cfg.opt.restarts = o["restarts"].get<int>();
    if (o.contains("grid_K")) cfg.opt.grid_K = o["grid_K"].get<int>();
    if (o.contains("tol_endpoint")) cfg.opt.tol_endpoint = o["tol_endpoint"].get<double>();
    if (o.contains("max_iterations")) cfg.opt.max_iterations = o["max_iterations"].get<int>();
    if (o.contains("penalty_stages")) cfg.opt.penalty_stages = o["penalty_stages"].get<int>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& file) {
  return parse_config_json(read_file(file));
}

}  // namespace srlab
