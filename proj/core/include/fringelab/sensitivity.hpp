#pragma once

#include <string>
#include <vector>

#include "fringelab/fringe.hpp"

namespace fringelab {

struct SensitivityCurve {
  std::vector<double> phis;
  std::vector<double> s_values;  // NaN where the fringe gives no stable value
  double s_max = 0.0;
  int n_photons = 0;
  std::string scheme_label;

  std::string to_csv() const;
  std::string to_json() const;
};

// Building blocks kept public so the trial-count cancellation is testable:
// delta_phi^2 = p(1-p) / (k (dp)^2), S^2 = 1/(k N delta_phi^2).
double phase_error_squared(double p, double dp, int trials);
double sensitivity_from_error(double delta_phi2, int trials, int n_photons);

// S(phi) = |dp/dphi| / sqrt(N p (1-p)) on a uniform grid. Derivatives use a
// five-point stencil (three-point beside the ends). Points with p within 1e-9
// of 0 or 1 are masked; finite values above sqrt(N)+1e-12 are treated as
// removable artefacts and excluded from s_max.
SensitivityCurve phase_sensitivity(const FringeScan& scan, int n_photons);

// Same sensitivity with closed-form p and dp/dphi; the photon number is
// implied by the fringe kind.
SensitivityCurve phase_sensitivity_analytic(AnalyticKind kind,
                                            const std::vector<double>& phis,
                                            int hb_photons = 4);

// Four-photon scheme counting >=3,>=1 and >=1,>=3 events together.
FringeScan combined_scheme_fringe(const SourceParams& params,
                                  const std::vector<double>& phis = uniform_grid());

// s_max per grid value. Interferometer and detector losses are reset to 1
// before evaluating (the sensitivity analysis excludes them); the swept
// variable is applied afterwards so eta_c sweeps remain meaningful.
std::vector<double> sensitivity_sweep(InputConfig config,
                                      const DetectionScheme& scheme, SweepVar var,
                                      const std::vector<double>& grid,
                                      SourceParams base = {});

}  // namespace fringelab
