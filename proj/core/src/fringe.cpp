#include "fringelab/fringe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "fringelab/fock.hpp"
#include "json.hpp"

namespace fringelab {

DetectionScheme DetectionScheme::at_least(int e, int f) {
  return DetectionScheme{Kind::AtLeast, e, f};
}

DetectionScheme DetectionScheme::exact(int e, int f) {
  return DetectionScheme{Kind::Exact, e, f};
}

DetectionScheme DetectionScheme::combined31() {
  return DetectionScheme{Kind::Combined31, 3, 1};
}

std::string DetectionScheme::label() const {
  char buf[48];
  switch (kind) {
    case Kind::AtLeast:
      std::snprintf(buf, sizeof buf, "atleast-%d,%d", e, f);
      return buf;
    case Kind::Exact:
      std::snprintf(buf, sizeof buf, "exact-%d,%d", e, f);
      return buf;
    case Kind::Combined31:
      return "combined-31+13";
  }
  throw std::logic_error("unhandled scheme kind");
}

double scheme_probability(const WeightedEnsemble& ensemble,
                          const TransferCoefficients& coeffs,
                          const DetectionScheme& scheme) {
  switch (scheme.kind) {
    case DetectionScheme::Kind::AtLeast:
      return ensemble_probability(ensemble, coeffs, scheme.e, scheme.f);
    case DetectionScheme::Kind::Exact:
      return ensemble_exact_probability(ensemble, coeffs, scheme.e, scheme.f);
    case DetectionScheme::Kind::Combined31:
      return ensemble_probability(ensemble, coeffs, 3, 1) +
             ensemble_probability(ensemble, coeffs, 1, 3);
  }
  throw std::logic_error("unhandled scheme kind");
}

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int env_threads() {
  if (const char* s = std::getenv("FRINGELAB_THREADS")) {
    int v = std::atoi(s);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace

std::string FringeScan::to_csv() const {
  const bool with_sigma = !sigmas.empty();
  std::string out = with_sigma ? "phi,prob,sigma\n" : "phi,prob\n";
  for (std::size_t i = 0; i < phis.size(); ++i) {
    out += fmt_g(phis[i]);
    out += ',';
    out += fmt_g(probs[i]);
    if (with_sigma) {
      out += ',';
      out += fmt_g(sigmas[i]);
    }
    out += '\n';
  }
  return out;
}

std::string FringeScan::to_json() const {
  nlohmann::json j;
  j["config"] = config_label;
  j["scheme"] = scheme_label;
  j["phi"] = phis;
  j["prob"] = probs;
  if (!sigmas.empty()) j["sigma"] = sigmas;
  return j.dump();
}

std::vector<double> uniform_grid(int n, double lo, double hi) {
  if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("grid bounds must satisfy hi > lo");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  }
  return xs;
}

FringeScan scan(InputConfig config, const SourceParams& params,
                const DetectionScheme& scheme, const std::vector<double>& phis) {
  const WeightedEnsemble ens = build_ensemble(config, params);
  FringeScan out;
  out.phis = phis;
  out.probs.resize(phis.size());
  out.config_label = config_name(config);
  out.scheme_label = scheme.label();

  auto eval_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto tc = transfer_coefficients(params.network(phis[i]));
      out.probs[i] = scheme_probability(ens, tc, scheme);
    }
  };

  const int nthreads = std::min<int>(env_threads(), static_cast<int>(phis.size()));
  if (nthreads <= 1) {
    eval_range(0, phis.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (phis.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(phis.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(eval_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

double analytic_fringe(AnalyticKind kind, double phi, int n_photons) {
  switch (kind) {
    case AnalyticKind::P10:
      return (1.0 - std::cos(phi)) / 2.0;
    case AnalyticKind::P11:
      return (1.0 + std::cos(2.0 * phi)) / 2.0;
    case AnalyticKind::P20:
      return 0.5 * (1.0 - std::cos(2.0 * phi)) / 2.0;
    case AnalyticKind::P22:
      return (3.0 / 8.0) * (1.0 - std::cos(4.0 * phi)) / 2.0;
    case AnalyticKind::Distinguishable11:
      return (3.0 + std::cos(2.0 * phi)) / 4.0;
    case AnalyticKind::HollandBurnett: {
      if (n_photons <= 0 || n_photons % 2 != 0) {
        throw std::invalid_argument("photon number must be even and positive");
      }
      const double half = factorial(n_photons / 2);
      const double pref =
          std::pow(2.0, -n_photons) * factorial(n_photons) / (half * half);
      return pref * (1.0 - std::cos(n_photons * phi)) / 2.0;
    }
  }
  throw std::logic_error("unhandled analytic fringe kind");
}

double photon_number_product_expectation(int n_photons, double phi) {
  if (n_photons <= 0 || n_photons % 2 != 0) {
    throw std::invalid_argument("photon number must be even and positive");
  }
  const double n = n_photons;
  const double s = std::sin(phi);
  return (n / 8.0) * (2.0 * n - (2.0 + n) * s * s);
}

std::string analytic_kind_name(AnalyticKind kind, int n_photons) {
  switch (kind) {
    case AnalyticKind::P10: return "P10";
    case AnalyticKind::P11: return "P11";
    case AnalyticKind::P20: return "P20";
    case AnalyticKind::P22: return "P22";
    case AnalyticKind::Distinguishable11: return "Distinguishable11";
    case AnalyticKind::HollandBurnett:
      return "HollandBurnett" + std::to_string(n_photons);
  }
  throw std::logic_error("unhandled analytic fringe kind");
}

FringeScan analytic_scan(AnalyticKind kind, const std::vector<double>& phis,
                         int n_photons) {
  FringeScan out;
  out.phis = phis;
  out.probs.reserve(phis.size());
  for (double phi : phis) out.probs.push_back(analytic_fringe(kind, phi, n_photons));
  out.config_label = "analytic";
  out.scheme_label = analytic_kind_name(kind, n_photons);
  return out;
}

std::string ContrastReport::to_json() const {
  nlohmann::json j;
  j["mean_contrast"] = mean_contrast;
  j["deep_contrast"] = deep_contrast ? nlohmann::json(*deep_contrast)
                                     : nlohmann::json(nullptr);
  j["shallow_contrast"] = shallow_contrast ? nlohmann::json(*shallow_contrast)
                                           : nlohmann::json(nullptr);
  j["uncertainty"] =
      uncertainty ? nlohmann::json(*uncertainty) : nlohmann::json(nullptr);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pairs) {
    arr.push_back({{"phi_max", p.phi_max},
                   {"phi_min", p.phi_min},
                   {"p_max", p.p_max},
                   {"p_min", p.p_min},
                   {"contrast", p.contrast},
                   {"deep", p.deep}});
  }
  j["pairs"] = arr;
  return j.dump();
}

namespace {

struct Extremum {
  double x;
  double y;
};

// Parabola through three equally spaced samples; vertex location and value.
Extremum refine(double x0, double x1, double /*x2*/, double y0, double y1,
                double y2) {
  const double d = y0 - 2.0 * y1 + y2;
  if (d == 0.0) return {x1, y1};
  const double h = x1 - x0;
  const double dx = 0.5 * h * (y0 - y2) / d;
  return {x1 + dx, y1 - 0.125 * (y0 - y2) * (y0 - y2) / d};
}

void extrema_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                    std::vector<Extremum>& maxima, std::vector<Extremum>& minima) {
  const std::size_t n = xs.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]) {
      maxima.push_back(
          refine(xs[i - 1], xs[i], xs[i + 1], ys[i - 1], ys[i], ys[i + 1]));
    }
    if (ys[i] < ys[i - 1] && ys[i] <= ys[i + 1]) {
      minima.push_back(
          refine(xs[i - 1], xs[i], xs[i + 1], ys[i - 1], ys[i], ys[i + 1]));
    }
  }
  if (ys[0] > ys[1]) maxima.insert(maxima.begin(), {xs[0], ys[0]});
  if (ys[0] < ys[1]) minima.insert(minima.begin(), {xs[0], ys[0]});
  if (ys[n - 1] > ys[n - 2]) maxima.push_back({xs[n - 1], ys[n - 1]});
  if (ys[n - 1] < ys[n - 2]) minima.push_back({xs[n - 1], ys[n - 1]});
}

// Scan covering one full period: last point duplicates the first, so work on
// the n-1 unique samples with wrapped neighborhoods.
void extrema_circular(const std::vector<double>& xs, const std::vector<double>& ys,
                      std::vector<Extremum>& maxima, std::vector<Extremum>& minima) {
  const std::size_t m = xs.size() - 1;
  const double h = xs[1] - xs[0];
  for (std::size_t i = 0; i < m; ++i) {
    const double ym1 = ys[(i + m - 1) % m];
    const double y0 = ys[i];
    const double yp1 = ys[(i + 1) % m];
    if (y0 > ym1 && y0 >= yp1) {
      maxima.push_back(refine(xs[i] - h, xs[i], xs[i] + h, ym1, y0, yp1));
    }
    if (y0 < ym1 && y0 <= yp1) {
      minima.push_back(refine(xs[i] - h, xs[i], xs[i] + h, ym1, y0, yp1));
    }
  }
}

double wrap_positive(double d, double period) {
  double w = std::fmod(d, period);
  if (w < 0.0) w += period;
  return w;
}

ContrastPair make_pair(const Extremum& mx, const Extremum& mn) {
  ContrastPair p;
  p.phi_max = mx.x;
  p.phi_min = mn.x;
  p.p_max = mx.y;
  p.p_min = mn.y;
  p.contrast = (mx.y + mn.y) > 0.0 ? (mx.y - mn.y) / (mx.y + mn.y) : 0.0;
  const double kpi = std::round(mn.x / kPi) * kPi;
  const double khalf = std::round((mn.x - kPi / 2.0) / kPi) * kPi + kPi / 2.0;
  p.deep = std::abs(mn.x - kpi) <= std::abs(mn.x - khalf);
  return p;
}

}  // namespace

ContrastReport contrast(const FringeScan& scan) {
  const auto& xs = scan.phis;
  const auto& ys = scan.probs;
  if (xs.size() < 3 || ys.size() != xs.size()) {
    throw std::invalid_argument("scan needs at least 3 matched points");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw std::invalid_argument("scan phases must be strictly increasing");
    }
  }

  const double h = xs[1] - xs[0];
  const bool circular = std::abs((xs.back() - xs.front()) - kTwoPi) <= h / 2.0;

  std::vector<Extremum> maxima;
  std::vector<Extremum> minima;
  if (circular) {
    extrema_circular(xs, ys, maxima, minima);
  } else {
    extrema_linear(xs, ys, maxima, minima);
  }
  if (maxima.empty() || minima.empty()) {
    throw std::runtime_error("no extrema found");
  }

  ContrastReport report;
  for (const auto& mx : maxima) {
    if (circular) {
      const Extremum* left = nullptr;
      const Extremum* right = nullptr;
      double best_left = 0.0;
      double best_right = 0.0;
      for (const auto& mn : minima) {
        const double dl = wrap_positive(mx.x - mn.x, kTwoPi);
        const double dr = wrap_positive(mn.x - mx.x, kTwoPi);
        if (!left || dl < best_left) {
          left = &mn;
          best_left = dl;
        }
        if (!right || dr < best_right) {
          right = &mn;
          best_right = dr;
        }
      }
      report.pairs.push_back(make_pair(mx, *left));
      report.pairs.push_back(make_pair(mx, *right));
    } else {
      const Extremum* left = nullptr;
      const Extremum* right = nullptr;
      for (const auto& mn : minima) {
        if (mn.x < mx.x && (!left || mn.x > left->x)) left = &mn;
        if (mn.x > mx.x && (!right || mn.x < right->x)) right = &mn;
      }
      if (left) report.pairs.push_back(make_pair(mx, *left));
      if (right) report.pairs.push_back(make_pair(mx, *right));
    }
  }
  if (report.pairs.empty()) {
    throw std::runtime_error("no extrema found");
  }

  double sum = 0.0;
  double deep_sum = 0.0;
  double shallow_sum = 0.0;
  int deep_n = 0;
  int shallow_n = 0;
  for (const auto& p : report.pairs) {
    sum += p.contrast;
    if (p.deep) {
      deep_sum += p.contrast;
      ++deep_n;
    } else {
      shallow_sum += p.contrast;
      ++shallow_n;
    }
  }
  report.mean_contrast = sum / static_cast<double>(report.pairs.size());
  if (deep_n > 0 && shallow_n > 0) {
    report.deep_contrast = deep_sum / deep_n;
    report.shallow_contrast = shallow_sum / shallow_n;
  }

  if (!scan.sigmas.empty() && report.pairs.size() >= 2) {
    double ss = 0.0;
    for (const auto& p : report.pairs) {
      const double d = p.contrast - report.mean_contrast;
      ss += d * d;
    }
    const auto n = static_cast<double>(report.pairs.size());
    report.uncertainty = std::sqrt(ss / ((n - 1.0) * n));
  }
  return report;
}

std::string sweep_var_name(SweepVar v) {
  switch (v) {
    case SweepVar::Indist: return "indistinguishability";
    case SweepVar::G2: return "g2";
    case SweepVar::EtaC: return "eta_c";
  }
  throw std::logic_error("unhandled sweep variable");
}

SweepVar sweep_var_from_name(const std::string& name) {
  if (name == "indistinguishability" || name == "indist" || name == "I") {
    return SweepVar::Indist;
  }
  if (name == "g2") return SweepVar::G2;
  if (name == "eta_c") return SweepVar::EtaC;
  throw std::invalid_argument("unknown sweep variable '" + name + "'");
}

std::vector<ContrastReport> parameter_sweep(InputConfig config,
                                            const DetectionScheme& scheme,
                                            SweepVar var,
                                            const std::vector<double>& grid,
                                            SourceParams base) {
  std::vector<ContrastReport> out;
  out.reserve(grid.size());
  const auto phis = uniform_grid();
  for (double v : grid) {
    SourceParams p = base;
    switch (var) {
      case SweepVar::Indist: p.indist = v; break;
      case SweepVar::G2: p.g2 = v; break;
      case SweepVar::EtaC: p.eta_c = v; break;
    }
    out.push_back(contrast(scan(config, p, scheme, phis)));
  }
  return out;
}

}  // namespace fringelab
