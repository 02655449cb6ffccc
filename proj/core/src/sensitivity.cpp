#include "fringelab/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fringelab {

namespace {

constexpr double kEdgeMask = 1e-9;       // p closer than this to 0 or 1
constexpr double kClipSlack = 1e-12;     // tolerance on the sqrt(N) ceiling
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void check_uniform(const std::vector<double>& xs) {
  if (xs.size() < 5) {
    throw std::invalid_argument("sensitivity needs at least 5 grid points");
  }
  const double h = xs[1] - xs[0];
  if (!(h > 0.0)) {
    throw std::invalid_argument("sensitivity grid must be increasing");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (std::abs((xs[i] - xs[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw std::invalid_argument("sensitivity grid must be uniform");
    }
  }
}

SensitivityCurve from_samples(const std::vector<double>& xs,
                              const std::vector<double>& ps, int n_photons,
                              const std::string& label) {
  check_uniform(xs);
  const double h = xs[1] - xs[0];
  const double period = kTwoPi / n_photons;
  if (period / h < 16.0) {
    throw std::invalid_argument("grid too coarse for stable derivative");
  }

  SensitivityCurve out;
  out.phis = xs;
  out.n_photons = n_photons;
  out.scheme_label = label;
  out.s_values.assign(xs.size(), kNaN);

  const double ceiling = std::sqrt(static_cast<double>(n_photons));
  const std::size_t n = xs.size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = ps[i];
    if (p < kEdgeMask || p > 1.0 - kEdgeMask) continue;
    double dp;
    if (i >= 2 && i + 2 < n) {
      dp = (-ps[i + 2] + 8.0 * ps[i + 1] - 8.0 * ps[i - 1] + ps[i - 2]) / (12.0 * h);
    } else if (i >= 1 && i + 1 < n) {
      dp = (ps[i + 1] - ps[i - 1]) / (2.0 * h);
    } else {
      continue;
    }
    const double s =
        std::sqrt(sensitivity_from_error(phase_error_squared(p, dp, 1), 1, n_photons));
    out.s_values[i] = s;
    if (s <= ceiling + kClipSlack && s > best) best = s;
  }
  out.s_max = best;
  return out;
}

int analytic_photons(AnalyticKind kind, int hb_photons) {
  switch (kind) {
    case AnalyticKind::P10: return 1;
    case AnalyticKind::P11: return 2;
    case AnalyticKind::P20: return 2;
    case AnalyticKind::P22: return 4;
    case AnalyticKind::Distinguishable11: return 2;
    case AnalyticKind::HollandBurnett: return hb_photons;
  }
  throw std::logic_error("unhandled analytic fringe kind");
}

double analytic_derivative(AnalyticKind kind, double phi, int hb_photons) {
  switch (kind) {
    case AnalyticKind::P10:
      return std::sin(phi) / 2.0;
    case AnalyticKind::P11:
      return -std::sin(2.0 * phi);
    case AnalyticKind::P20:
      return std::sin(2.0 * phi) / 2.0;
    case AnalyticKind::P22:
      return 0.75 * std::sin(4.0 * phi);
    case AnalyticKind::Distinguishable11:
      return -std::sin(2.0 * phi) / 2.0;
    case AnalyticKind::HollandBurnett: {
      const double half = factorial(hb_photons / 2);
      const double pref =
          std::pow(2.0, -hb_photons) * factorial(hb_photons) / (half * half);
      return pref * hb_photons * std::sin(hb_photons * phi) / 2.0;
    }
  }
  throw std::logic_error("unhandled analytic fringe kind");
}

}  // namespace

std::string SensitivityCurve::to_csv() const {
  std::string out = "phi,S\n";
  for (std::size_t i = 0; i < phis.size(); ++i) {
    out += fmt_g(phis[i]);
    out += ',';
    out += fmt_g(s_values[i]);
    out += '\n';
  }
  return out;
}

std::string SensitivityCurve::to_json() const {
  nlohmann::json j;
  j["scheme"] = scheme_label;
  j["n_photons"] = n_photons;
  j["s_max"] = s_max;
  j["phi"] = phis;
  j["S"] = s_values;  // non-finite entries serialize as null
  return j.dump();
}

double phase_error_squared(double p, double dp, int trials) {
  if (trials < 1) throw std::invalid_argument("trial count must be positive");
  return p * (1.0 - p) / (trials * dp * dp);
}

double sensitivity_from_error(double delta_phi2, int trials, int n_photons) {
  if (trials < 1 || n_photons < 1) {
    throw std::invalid_argument("trial and photon counts must be positive");
  }
  return 1.0 / (trials * n_photons * delta_phi2);
}

SensitivityCurve phase_sensitivity(const FringeScan& scan, int n_photons) {
  if (n_photons < 1) throw std::invalid_argument("photon count must be positive");
  if (scan.probs.size() != scan.phis.size()) {
    throw std::invalid_argument("scan phases and probabilities differ in length");
  }
  return from_samples(scan.phis, scan.probs, n_photons,
                      scan.config_label + "/" + scan.scheme_label);
}

SensitivityCurve phase_sensitivity_analytic(AnalyticKind kind,
                                            const std::vector<double>& phis,
                                            int hb_photons) {
  const int n_photons = analytic_photons(kind, hb_photons);
  check_uniform(phis);
  const double h = phis[1] - phis[0];
  if (kTwoPi / n_photons / h < 16.0) {
    throw std::invalid_argument("grid too coarse for stable derivative");
  }

  SensitivityCurve out;
  out.phis = phis;
  out.n_photons = n_photons;
  out.scheme_label = analytic_kind_name(kind, hb_photons);
  out.s_values.assign(phis.size(), kNaN);

  const double ceiling = std::sqrt(static_cast<double>(n_photons));
  double best = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const double p = analytic_fringe(kind, phis[i], hb_photons);
    if (p < kEdgeMask || p > 1.0 - kEdgeMask) continue;
    const double dp = analytic_derivative(kind, phis[i], hb_photons);
    const double s =
        std::sqrt(sensitivity_from_error(phase_error_squared(p, dp, 1), 1, n_photons));
    out.s_values[i] = s;
    if (s <= ceiling + kClipSlack && s > best) best = s;
  }
  out.s_max = best;
  return out;
}

FringeScan combined_scheme_fringe(const SourceParams& params,
                                  const std::vector<double>& phis) {
  return scan(InputConfig::Ket22, params, DetectionScheme::combined31(), phis);
}

std::vector<double> sensitivity_sweep(InputConfig config,
                                      const DetectionScheme& scheme, SweepVar var,
                                      const std::vector<double>& grid,
                                      SourceParams base) {
  std::vector<double> out;
  out.reserve(grid.size());
  const auto phis = uniform_grid();
  const int n_photons = photons_per_trial(config);
  for (double v : grid) {
    SourceParams p = base.without_losses();
    switch (var) {
      case SweepVar::Indist: p.indist = v; break;
      case SweepVar::G2: p.g2 = v; break;
      case SweepVar::EtaC: p.eta_c = v; break;
    }
    const FringeScan fs = scan(config, p, scheme, phis);
    out.push_back(phase_sensitivity(fs, n_photons).s_max);
  }
  return out;
}

}  // namespace fringelab
