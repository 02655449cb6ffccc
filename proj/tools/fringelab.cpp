#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fringelab/calib.hpp"
#include "fringelab/fitsolver.hpp"
#include "fringelab/fringe.hpp"
#include "fringelab/sensitivity.hpp"
#include "fringelab/temporal.hpp"

namespace {

using nlohmann::json;
using namespace fringelab;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// Outputs are a CSV plus a JSON sidecar echoing every parameter, so a run can
// be reproduced from its own artifacts. No timestamps: reruns are
// byte-identical.
void write_outputs(const std::string& prefix, const std::string& csv,
                   json sidecar) {
  const std::string csv_path = prefix + ".csv";
  sidecar["csv"] = csv_path;
  write_text(csv_path, csv);
  write_text(prefix + ".json", sidecar.dump(2) + "\n");
  std::cout << csv_path << "\n" << prefix + ".json" << "\n";
}

struct SourceFlags {
  double g2 = 0.0;
  double indist = 1.0;
  double eta_c = 1.0;
  double eta_d = 1.0;
  double eta_e = 1.0;
  double eta_f = 1.0;
  bool ideal = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--g2", g2, "heralded second-order correlation g2(0)");
    cmd->add_option("--indist", indist, "pairwise indistinguishability");
    cmd->add_option("--eta-c", eta_c, "interferometer arm c efficiency");
    cmd->add_option("--eta-d", eta_d, "interferometer arm d efficiency");
    cmd->add_option("--eta-e", eta_e, "detector arm e efficiency");
    cmd->add_option("--eta-f", eta_f, "detector arm f efficiency");
    cmd->add_flag("--ideal", ideal,
                  "force a lossless pure source (overrides the above)");
  }

  SourceParams params() const {
    SourceParams p;
    if (!ideal) {
      p.g2 = g2;
      p.indist = indist;
      p.eta_c = eta_c;
      p.eta_d = eta_d;
      p.eta_e = eta_e;
      p.eta_f = eta_f;
    }
    p.validate();
    return p;
  }

  void echo(json& j) const {
    const SourceParams p = params();
    j["g2"] = p.g2;
    j["indistinguishability"] = p.indist;
    j["eta_c"] = p.eta_c;
    j["eta_d"] = p.eta_d;
    j["eta_e"] = p.eta_e;
    j["eta_f"] = p.eta_f;
  }
};

struct GridFlags {
  int points = kDefaultGridPoints;
  double phi_min = 0.0;
  double phi_max = kTwoPi;

  void attach(CLI::App* cmd) {
    cmd->add_option("--points", points, "number of phase samples")
        ->check(CLI::Range(2, 1000000));
    cmd->add_option("--phi-min", phi_min, "first phase sample, radians");
    cmd->add_option("--phi-max", phi_max, "last phase sample, radians");
  }

  std::vector<double> grid() const { return uniform_grid(points, phi_min, phi_max); }

  void echo(json& j) const {
    j["points"] = points;
    j["phi_min"] = phi_min;
    j["phi_max"] = phi_max;
  }
};

DetectionScheme parse_scheme(const std::string& text, bool exact,
                             InputConfig config) {
  if (text.empty()) {
    // canonical fringe for each input
    if (config == InputConfig::Ket10) return DetectionScheme::at_least(1, 0);
    if (config == InputConfig::Ket22) return DetectionScheme::at_least(3, 1);
    return DetectionScheme::at_least(1, 1);
  }
  if (text == "combined31") return DetectionScheme::combined31();
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw std::invalid_argument("scheme must be 'e,f' or 'combined31', got '" +
                                text + "'");
  }
  const int e = std::stoi(text.substr(0, comma));
  const int f = std::stoi(text.substr(comma + 1));
  return exact ? DetectionScheme::exact(e, f) : DetectionScheme::at_least(e, f);
}

// Closed forms exist only for the four canonical input/scheme pairings.
std::optional<AnalyticKind> matching_analytic(InputConfig config,
                                              const DetectionScheme& scheme,
                                              double indist) {
  if (scheme.kind != DetectionScheme::Kind::AtLeast) return std::nullopt;
  if (config == InputConfig::Ket10 && scheme.e == 1 && scheme.f == 0)
    return AnalyticKind::P10;
  if (config == InputConfig::Ket11 && scheme.e == 1 && scheme.f == 1)
    return indist == 0.0 ? AnalyticKind::Distinguishable11 : AnalyticKind::P11;
  if (config == InputConfig::Ket20 && scheme.e == 1 && scheme.f == 1)
    return AnalyticKind::P20;
  if (config == InputConfig::Ket22 && scheme.e == 3 && scheme.f == 1)
    return AnalyticKind::P22;
  return std::nullopt;
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  std::size_t min_cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.back() == '\r') {
      if (!line.empty()) line.pop_back();
      if (line.empty()) continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used == 0) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw std::runtime_error("non-numeric row in '" + path + "': " + line);
    }
    first = false;
    if (row.size() < min_cols) {
      throw std::runtime_error("row with fewer than " +
                               std::to_string(min_cols) + " columns in '" +
                               path + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("'" + path + "' holds no data");
  std::vector<std::vector<double>> cols(rows.front().size());
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cols[c].push_back(c < row.size() ? row[c] : 0.0);
    }
  }
  return cols;
}

FitData read_fit_data(const std::string& path) {
  const auto cols = read_csv_columns(path, 2);
  FitData data;
  data.phi = cols[0];
  data.value = cols[1];
  if (cols.size() > 2) data.sigma = cols[2];
  return data;
}

json contrast_json(const ContrastReport& report) {
  return json::parse(report.to_json());
}

// Flat key=value config support. The file expands to --key=value tokens
// inserted right after the subcommand name, so explicit flags (parsed later
// under a take-last policy) override config entries.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line without '=': " + t);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line without key: " + t);
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--config" && std::next(it) != args.end()) {
      config_path = *std::next(it);
      it = args.erase(it, std::next(it, 2));
    } else if (it->rfind("--config=", 0) == 0) {
      config_path = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  if (!config_path.empty()) {
    const auto tokens = config_tokens(config_path);
    auto pos = args.begin();
    if (pos != args.end() && !pos->empty() && (*pos)[0] != '-') ++pos;
    args.insert(pos, tokens.begin(), tokens.end());
  }
  return args;
}

int cmd_scan(const std::string& out, const SourceFlags& source,
             const GridFlags& grid, const std::string& input,
             const std::string& scheme_text, bool exact) {
  const InputConfig config = config_from_name(input);
  const DetectionScheme scheme = parse_scheme(scheme_text, exact, config);
  const SourceParams params = source.params();
  const auto phis = grid.grid();
  const FringeScan fringe = scan(config, params, scheme, phis);

  const auto overlay =
      source.ideal ? matching_analytic(config, scheme, params.indist)
                   : std::nullopt;
  std::string csv = overlay ? "phi,prob,analytic\n" : "phi,prob\n";
  for (std::size_t i = 0; i < phis.size(); ++i) {
    csv += fmt(fringe.phis[i]) + "," + fmt(fringe.probs[i]);
    if (overlay) csv += "," + fmt(analytic_fringe(*overlay, fringe.phis[i]));
    csv += "\n";
  }

  json j;
  j["command"] = "scan";
  j["input"] = config_name(config);
  j["scheme"] = scheme.label();
  source.echo(j["parameters"]);
  grid.echo(j["parameters"]);
  j["analytic_overlay"] =
      overlay ? json(analytic_kind_name(*overlay)) : json(nullptr);
  j["contrast"] = contrast_json(contrast(fringe));
  write_outputs(out, csv, j);
  return 0;
}

int cmd_sweep(const std::string& out, const SourceFlags& source,
              const std::string& input, const std::string& scheme_text,
              bool exact, const std::string& var_name, double from, double to,
              int steps) {
  const InputConfig config = config_from_name(input);
  const DetectionScheme scheme = parse_scheme(scheme_text, exact, config);
  const SweepVar var = sweep_var_from_name(var_name);
  const auto grid = uniform_grid(steps, from, to);
  const auto reports = parameter_sweep(config, scheme, var, grid, source.params());

  std::string csv = var_name + ",mean_contrast,deep_contrast,shallow_contrast\n";
  json points = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = reports[i];
    csv += fmt(grid[i]) + "," + fmt(r.mean_contrast) + ",";
    csv += (r.deep_contrast ? fmt(*r.deep_contrast) : "") + ",";
    csv += (r.shallow_contrast ? fmt(*r.shallow_contrast) : "") + "\n";
    points.push_back({{"value", grid[i]}, {"contrast", contrast_json(r)}});
  }

  json j;
  j["command"] = "sweep";
  j["input"] = config_name(config);
  j["scheme"] = scheme.label();
  j["variable"] = sweep_var_name(var);
  j["from"] = from;
  j["to"] = to;
  j["steps"] = steps;
  source.echo(j["parameters"]);
  j["points"] = points;
  write_outputs(out, csv, j);
  return 0;
}

int cmd_sensitivity(const std::string& out, const SourceFlags& source,
                    const GridFlags& grid, const std::string& input,
                    const std::string& scheme_text, bool exact,
                    const std::string& analytic, int photons,
                    const std::string& var_name, double from, double to,
                    int steps) {
  json j;
  j["command"] = "sensitivity";
  source.echo(j["parameters"]);

  if (!var_name.empty()) {
    // sweep mode: best sensitivity as one loss channel varies
    const InputConfig config = config_from_name(input);
    const DetectionScheme scheme = parse_scheme(scheme_text, exact, config);
    const SweepVar var = sweep_var_from_name(var_name);
    const auto values = uniform_grid(steps, from, to);
    const auto smax =
        sensitivity_sweep(config, scheme, var, values, source.params());
    std::string csv = var_name + ",s_max\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv += fmt(values[i]) + "," + fmt(smax[i]) + "\n";
    }
    j["input"] = config_name(config);
    j["scheme"] = scheme.label();
    j["variable"] = sweep_var_name(var);
    j["from"] = from;
    j["to"] = to;
    j["steps"] = steps;
    write_outputs(out, csv, j);
    return 0;
  }

  SensitivityCurve curve;
  if (!analytic.empty()) {
    static const std::map<std::string, AnalyticKind> kinds = {
        {"p10", AnalyticKind::P10},
        {"p11", AnalyticKind::P11},
        {"p20", AnalyticKind::P20},
        {"p22", AnalyticKind::P22},
        {"dist11", AnalyticKind::Distinguishable11},
        {"hb", AnalyticKind::HollandBurnett}};
    const auto it = kinds.find(analytic);
    if (it == kinds.end()) {
      throw std::invalid_argument("unknown analytic fringe '" + analytic + "'");
    }
    curve = phase_sensitivity_analytic(it->second, grid.grid(), photons);
    j["analytic"] = analytic_kind_name(it->second, photons);
  } else {
    const InputConfig config = config_from_name(input);
    const DetectionScheme scheme = parse_scheme(scheme_text, exact, config);
    const SourceParams params = source.params();
    const auto phis = grid.grid();
    const FringeScan fringe = scheme.kind == DetectionScheme::Kind::Combined31
                                  ? combined_scheme_fringe(params, phis)
                                  : scan(config, params, scheme, phis);
    curve = phase_sensitivity(fringe, photons_per_trial(config));
    j["input"] = config_name(config);
    j["scheme"] = scheme.label();
  }
  grid.echo(j["parameters"]);
  j["n_photons"] = curve.n_photons;
  j["s_max"] = curve.s_max;
  write_outputs(out, curve.to_csv(), j);
  return 0;
}

int cmd_fit(const std::string& out, const SourceFlags& source,
            const std::string& input, const std::string& scheme_text, bool exact,
            const std::string& data_path, const std::vector<std::string>& free,
            double scale, int max_iter, bool staged,
            const std::map<std::string, std::string>& staged_paths,
            const StagedOptions& staged_options) {
  json j;
  j["command"] = "fit";

  if (staged) {
    std::map<InputConfig, FitData> datasets;
    for (const auto& [name, path] : staged_paths) {
      if (!path.empty()) datasets[config_from_name(name)] = read_fit_data(path);
    }
    if (datasets.empty()) {
      throw std::invalid_argument("staged fit needs at least --data-10");
    }
    const StagedResult result = staged_workflow(datasets, staged_options);
    j["staged"] = json::parse(result.to_json());
    j["options"] = {{"eta_c_fixed", staged_options.eta_c_fixed},
                    {"g2_fixed", staged_options.g2_fixed},
                    {"eta_e_ket20", staged_options.eta_e_ket20},
                    {"crosscheck_g2", staged_options.crosscheck_g2}};
    std::string csv = "parameter,value,sigma\n";
    for (const auto& [config, fit_result] : result.stages) {
      for (const auto& [pname, sigma] : fit_result.uncertainties) {
        if (pname == "scale" || pname == "offset") continue;
        double value = 0.0;
        if (pname == "g2") value = fit_result.best.g2;
        else if (pname == "indistinguishability") value = fit_result.best.indist;
        else if (pname == "eta_c") value = fit_result.best.eta_c;
        else if (pname == "eta_d") value = fit_result.best.eta_d;
        else if (pname == "eta_e") value = fit_result.best.eta_e;
        else if (pname == "eta_f") value = fit_result.best.eta_f;
        csv += config_name(config) + "." + pname + "," + fmt(value) + "," +
               fmt(sigma) + "\n";
      }
    }
    write_outputs(out, csv, j);
    return 0;
  }

  if (data_path.empty()) {
    throw std::invalid_argument("fit needs --data (or --staged with --data-NN)");
  }
  FitProblem problem;
  problem.data = read_fit_data(data_path);
  problem.config = config_from_name(input);
  problem.scheme = parse_scheme(scheme_text, exact, problem.config);
  problem.params = source.params();
  problem.scale = scale;
  problem.max_iterations = max_iter;
  for (const auto& name : free) {
    if (name == "g2") problem.params.fixed.g2 = false;
    else if (name == "indist") problem.params.fixed.indist = false;
    else if (name == "eta_c") problem.params.fixed.eta_c = false;
    else if (name == "eta_d") problem.params.fixed.eta_d = false;
    else if (name == "eta_e") problem.params.fixed.eta_e = false;
    else if (name == "eta_f") problem.params.fixed.eta_f = false;
    else throw std::invalid_argument("unknown free parameter '" + name + "'");
  }
  const FitResult result = fit(problem);

  // residual curve alongside the data for plotting
  const auto model = scan(problem.config, result.best, problem.scheme,
                          problem.data.phi);
  std::string csv = "phi,value,model\n";
  for (std::size_t i = 0; i < problem.data.phi.size(); ++i) {
    csv += fmt(problem.data.phi[i]) + "," + fmt(problem.data.value[i]) + "," +
           fmt(result.scale * model.probs[i] + result.offset) + "\n";
  }
  j["input"] = config_name(problem.config);
  j["scheme"] = problem.scheme.label();
  j["data"] = data_path;
  j["free"] = free;
  source.echo(j["start"]);
  j["result"] = json::parse(result.to_json());
  write_outputs(out, csv, j);
  return 0;
}

int cmd_calibrate(const std::string& out, const std::string& data_path,
                  bool degrees, double hysteresis, bool robust,
                  bool no_offset) {
  const auto cols = read_csv_columns(data_path, 2);
  std::vector<double> theta = cols[0];
  if (degrees) {
    for (auto& t : theta) t *= kPi / 180.0;
  }
  const CalibrationCurve curve =
      calibrate(theta, cols[1], hysteresis, robust, !no_offset);

  json j;
  j["command"] = "calibrate";
  j["data"] = data_path;
  j["degrees"] = degrees;
  j["hysteresis"] = hysteresis;
  j["robust_extrema"] = robust;
  j["with_offset"] = !no_offset;
  j["fit"] = json::parse(curve.to_json());
  write_outputs(out, curve.to_csv(), j);
  return 0;
}

int cmd_overlap(const std::string& out, const SourceFlags& source, double t1,
                double wp, double tau_max, int steps) {
  WavepacketParams wave;
  wave.T1 = t1;
  wave.w_p = wp;
  wave.validate();
  const auto taus = uniform_grid(steps, 0.0, tau_max);
  const auto points = contrast_vs_separation(taus, wave, source.params());

  std::string csv = "tau_ps,overlap,indistinguishability,contrast\n";
  for (const auto& p : points) {
    csv += fmt(p.tau_ps) + "," + fmt(p.overlap) + "," + fmt(p.indist) + "," +
           fmt(p.contrast) + "\n";
  }

  json j;
  j["command"] = "overlap";
  j["T1_ps"] = wave.T1;
  j["w_p_ps"] = wave.w_p;
  j["tau_max_ps"] = tau_max;
  j["steps"] = steps;
  source.echo(j["parameters"]);

  // contrast decay constant over the tail, when the grid reaches it
  std::vector<double> tail_tau, tail_c;
  for (const auto& p : points) {
    if (p.tau_ps >= 2.0 * wave.T1 && p.tau_ps <= 6.0 * wave.T1) {
      tail_tau.push_back(p.tau_ps);
      tail_c.push_back(p.contrast);
    }
  }
  if (tail_tau.size() >= 8) {
    j["contrast_decay_ps"] =
        exponential_decay_constant(tail_tau, tail_c, 1.0 / 3.0);
  } else {
    j["contrast_decay_ps"] = nullptr;
  }
  write_outputs(out, csv, j);
  return 0;
}

int cmd_synthesize(const std::string& out, const SourceFlags& source,
                   const GridFlags& grid, const std::string& input,
                   const std::string& scheme_text, bool exact, double counts,
                   std::uint64_t seed) {
  const InputConfig config = config_from_name(input);
  const DetectionScheme scheme = parse_scheme(scheme_text, exact, config);
  const auto phis = grid.grid();
  const FitData data =
      synthesize_dataset(config, source.params(), scheme, phis, counts, seed);

  std::string csv = "phi,value,sigma\n";
  for (std::size_t i = 0; i < data.phi.size(); ++i) {
    csv += fmt(data.phi[i]) + "," + fmt(data.value[i]) + "," +
           fmt(data.sigma[i]) + "\n";
  }

  json j;
  j["command"] = "synthesize";
  j["input"] = config_name(config);
  j["scheme"] = scheme.label();
  j["counts_per_point"] = counts;
  j["seed"] = seed;
  source.echo(j["parameters"]);
  grid.echo(j["parameters"]);
  write_outputs(out, csv, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-mode interferometer fringe toolkit"};
  app.set_version_flag("--version", "fringelab 0.1.0");
  app.require_subcommand(1);

  // every subcommand: --out prefix and an optional key=value config file,
  // with command-line flags taking precedence. --config is consumed before
  // CLI11 sees the arguments; the no-op option here documents it in --help.
  std::string config_help;
  auto configure = [&config_help](CLI::App* cmd, std::string& out) {
    cmd->add_option("--out", out, "output prefix (writes PREFIX.csv/.json)")
        ->required();
    cmd->add_option("--config", config_help,
                    "key=value file of long option names; flags override it");
  };

  std::string input = "Ket11";
  std::string scheme_text;
  bool exact = false;
  auto io_options = [&](CLI::App* cmd) {
    cmd->add_option("--input", input, "input configuration: 10, 11, 20 or 22");
    cmd->add_option("--scheme", scheme_text,
                    "detection thresholds 'e,f' or 'combined31' "
                    "(default: the canonical fringe for the input)");
    cmd->add_flag("--exact", exact,
                  "count exact photon numbers instead of at-least thresholds");
  };

  SourceFlags source;
  GridFlags grid;

  std::string out_scan;
  auto* scan_cmd = app.add_subcommand("scan", "fringe scan over phase");
  configure(scan_cmd, out_scan);
  io_options(scan_cmd);
  source.attach(scan_cmd);
  grid.attach(scan_cmd);

  std::string out_sweep, sweep_var = "g2";
  double sweep_from = 0.0, sweep_to = 0.1;
  int sweep_steps = 41;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "fringe contrast against a source parameter");
  configure(sweep_cmd, out_sweep);
  io_options(sweep_cmd);
  source.attach(sweep_cmd);
  sweep_cmd->add_option("--var", sweep_var, "swept variable: g2, indist, eta_c");
  sweep_cmd->add_option("--from", sweep_from, "first grid value");
  sweep_cmd->add_option("--to", sweep_to, "last grid value");
  sweep_cmd->add_option("--steps", sweep_steps, "grid size")
      ->check(CLI::Range(2, 100000));

  std::string out_sens, sens_analytic, sens_var;
  int sens_photons = 4;
  double sens_from = 0.0, sens_to = 1.0;
  int sens_steps = 41;
  auto* sens_cmd = app.add_subcommand(
      "sensitivity", "phase sensitivity per phase point, or its best value "
                     "against a loss channel");
  configure(sens_cmd, out_sens);
  io_options(sens_cmd);
  source.attach(sens_cmd);
  grid.attach(sens_cmd);
  sens_cmd->add_option("--analytic", sens_analytic,
                       "closed-form fringe: p10, p11, p20, p22, dist11, hb");
  sens_cmd->add_option("--photons", sens_photons,
                       "photon number for hb and trial normalization");
  sens_cmd->add_option("--var", sens_var,
                       "sweep mode: vary g2, indist or eta_c and report s_max");
  sens_cmd->add_option("--from", sens_from, "sweep start");
  sens_cmd->add_option("--to", sens_to, "sweep end");
  sens_cmd->add_option("--steps", sens_steps, "sweep grid size")
      ->check(CLI::Range(2, 100000));

  std::string out_fit, fit_data;
  std::vector<std::string> fit_free;
  double fit_scale = 0.0;
  int fit_max_iter = 500;
  bool fit_staged = false;
  std::map<std::string, std::string> staged_paths = {
      {"Ket10", ""}, {"Ket20", ""}, {"Ket11", ""}, {"Ket22", ""}};
  StagedOptions staged_options;
  bool no_crosscheck = false;
  auto* fit_cmd =
      app.add_subcommand("fit", "least-squares fit of fringe data");
  configure(fit_cmd, out_fit);
  io_options(fit_cmd);
  source.attach(fit_cmd);
  fit_cmd->add_option("--data", fit_data, "CSV with phi,value[,sigma]");
  fit_cmd->add_option("--free", fit_free,
                      "parameters to fit: g2, indist, eta_c, eta_d, eta_e, eta_f")
      ->delimiter(',');
  fit_cmd->add_option("--scale", fit_scale,
                      "starting amplitude scale (0 derives one from the data)");
  fit_cmd->add_option("--max-iter", fit_max_iter, "iteration budget");
  fit_cmd->add_flag("--staged", fit_staged,
                    "run the sequential four-dataset pipeline");
  fit_cmd->add_option("--data-10", staged_paths["Ket10"], "Ket10 dataset CSV");
  fit_cmd->add_option("--data-20", staged_paths["Ket20"], "Ket20 dataset CSV");
  fit_cmd->add_option("--data-11", staged_paths["Ket11"], "Ket11 dataset CSV");
  fit_cmd->add_option("--data-22", staged_paths["Ket22"], "Ket22 dataset CSV");
  fit_cmd->add_option("--eta-c-fixed", staged_options.eta_c_fixed,
                      "staged: interferometer arm c efficiency");
  fit_cmd->add_option("--g2-fixed", staged_options.g2_fixed,
                      "staged: g2 held in stages 2-4");
  fit_cmd->add_option("--eta-e-ket20", staged_options.eta_e_ket20,
                      "staged: eta_e held in the Ket20 stage");
  fit_cmd->add_flag("--no-crosscheck", no_crosscheck,
                    "staged: skip the free-g2 crosscheck fit");

  std::string out_calib, calib_data;
  bool calib_deg = false, calib_robust = false, calib_no_offset = false;
  double calib_hyst = 0.02;
  auto* calib_cmd = app.add_subcommand(
      "calibrate", "plate angle to phase mapping from an intensity scan");
  configure(calib_cmd, out_calib);
  calib_cmd->add_option("--data", calib_data, "CSV with theta,intensity")
      ->required();
  calib_cmd->add_flag("--deg", calib_deg, "theta column is in degrees");
  calib_cmd->add_option("--hysteresis", calib_hyst,
                        "reversal confirmation band on normalized intensity");
  calib_cmd->add_flag("--robust", calib_robust,
                      "normalize against median extremes instead of min/max");
  calib_cmd->add_flag("--no-offset", calib_no_offset,
                      "force the quadratic fit through zero");

  std::string out_overlap;
  double overlap_t1 = 59.0, overlap_wp = 8.86, overlap_tau_max = 350.0;
  int overlap_steps = 71;
  auto* overlap_cmd = app.add_subcommand(
      "overlap", "wavepacket overlap and fringe contrast against arrival-time "
                 "separation");
  configure(overlap_cmd, out_overlap);
  source.attach(overlap_cmd);
  overlap_cmd->add_option("--t1", overlap_t1, "emitter lifetime, ps");
  overlap_cmd->add_option("--wp", overlap_wp, "excitation pulse width, ps");
  overlap_cmd->add_option("--tau-max", overlap_tau_max, "last separation, ps");
  overlap_cmd->add_option("--steps", overlap_steps, "separation grid size")
      ->check(CLI::Range(2, 100000));

  std::string out_synth;
  double synth_counts = 1e5;
  std::uint64_t synth_seed = 1;
  auto* synth_cmd = app.add_subcommand(
      "synthesize", "Poisson-noise synthetic fringe dataset at given truth");
  configure(synth_cmd, out_synth);
  io_options(synth_cmd);
  source.attach(synth_cmd);
  grid.attach(synth_cmd);
  synth_cmd->add_option("--counts", synth_counts,
                        "Poisson mean at the fringe peak");
  synth_cmd->add_option("--seed", synth_seed, "random seed");

  try {
    std::vector<std::string> args = expand_args(argc, argv);
    for (auto* sub : app.get_subcommands({})) {
      for (auto* opt : sub->get_options()) {
        if (opt->get_expected_max() == 1) {
          opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (scan_cmd->parsed()) {
      return cmd_scan(out_scan, source, grid, input, scheme_text, exact);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(out_sweep, source, input, scheme_text, exact, sweep_var,
                       sweep_from, sweep_to, sweep_steps);
    }
    if (sens_cmd->parsed()) {
      return cmd_sensitivity(out_sens, source, grid, input, scheme_text, exact,
                             sens_analytic, sens_photons, sens_var, sens_from,
                             sens_to, sens_steps);
    }
    if (fit_cmd->parsed()) {
      staged_options.crosscheck_g2 = !no_crosscheck;
      return cmd_fit(out_fit, source, input, scheme_text, exact, fit_data,
                     fit_free, fit_scale, fit_max_iter, fit_staged,
                     staged_paths, staged_options);
    }
    if (calib_cmd->parsed()) {
      return cmd_calibrate(out_calib, calib_data, calib_deg, calib_hyst,
                           calib_robust, calib_no_offset);
    }
    if (overlap_cmd->parsed()) {
      return cmd_overlap(out_overlap, source, overlap_t1, overlap_wp,
                         overlap_tau_max, overlap_steps);
    }
    if (synth_cmd->parsed()) {
      return cmd_synthesize(out_synth, source, grid, input, scheme_text, exact,
                            synth_counts, synth_seed);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
