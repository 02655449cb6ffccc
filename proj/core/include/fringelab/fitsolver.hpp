#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fringelab/fringe.hpp"

namespace fringelab {

struct FitData {
  std::vector<double> phi;
  std::vector<double> value;  // detected counts (an overall scale is fitted)
  std::vector<double> sigma;  // empty -> sqrt(max(value,1)) Poisson default
};

struct FitProblem {
  FitData data;
  InputConfig config = InputConfig::Ket11;
  DetectionScheme scheme = DetectionScheme::at_least(1, 1);
  // starting values; params.fixed flags decide which stay frozen
  SourceParams params{};
  double scale = 0.0;  // initial guess; <= 0 derives one from the data
  double offset = 0.0;
  bool offset_fixed = true;
  int max_iterations = 500;
};

struct FitResult {
  SourceParams best{};
  double scale = 0.0;
  double offset = 0.0;
  std::map<std::string, double> uncertainties;  // free parameters only
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;

  std::string to_json() const;
};

// Damped least squares (Levenberg-Marquardt) over the free parameters.
// Bounded [0,1] parameters move through a logit transform and the scale
// through a log transform, so steps never leave the valid region. The
// Jacobian is central-difference; uncertainties come from the curvature at
// the optimum scaled by the reduced chi-square.
FitResult fit(const FitProblem& problem);

struct StagedOptions {
  double eta_c_fixed = 0.8034;  // from independently measured throughputs
  double g2_fixed = 0.018;
  double eta_e_ket20 = 0.32;  // detector-arm split assumption eta_e ~ eta_f
  bool crosscheck_g2 = true;  // refit two-photon data with g2 free
  int max_iterations = 500;
};

struct StagedResult {
  std::map<InputConfig, FitResult> stages;
  std::optional<FitResult> g2_crosscheck;
  SourceParams combined{};  // one consistent parameter set across stages

  std::string to_json() const;
};

// Sequential pipeline over the four input configurations: single-photon data
// pins eta_d, two-photon single-mode data splits the detector arms, the
// two-mode data fits the indistinguishability, and the four-photon data fits
// the remaining detector efficiency.
StagedResult staged_workflow(const std::map<InputConfig, FitData>& datasets,
                             const StagedOptions& options = {});

// Mean two-photon contrast as a function of g2 at otherwise fixed params.
// Warns (stderr) past g2 = 0.1 and refuses past 0.2 where the truncated
// source model breaks down.
std::vector<std::pair<double, double>> contrast_vs_g2_curve(
    const SourceParams& params, const std::vector<double>& g2_grid);

// Poisson-noise synthetic dataset at the given truth parameters.
FitData synthesize_dataset(InputConfig config, const SourceParams& truth,
                           const DetectionScheme& scheme,
                           const std::vector<double>& phis,
                           double counts_per_point, std::uint64_t seed);

}  // namespace fringelab
