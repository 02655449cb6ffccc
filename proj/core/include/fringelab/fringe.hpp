#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fringelab/ensemble.hpp"

namespace fringelab {

inline constexpr int kDefaultGridPoints = 721;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Which detector outcomes count as an event. AtLeast(e,f) accepts every
// outcome with >=e photons at e and >=f at f; Exact demands the counts
// themselves. Combined31 sums the two mirrored at-least thresholds used for
// the four-photon sensitivity scheme.
struct DetectionScheme {
  enum class Kind { AtLeast, Exact, Combined31 };

  Kind kind = Kind::AtLeast;
  int e = 1;
  int f = 0;

  static DetectionScheme at_least(int e, int f);
  static DetectionScheme exact(int e, int f);
  static DetectionScheme combined31();

  std::string label() const;
};

double scheme_probability(const WeightedEnsemble& ensemble,
                          const TransferCoefficients& coeffs,
                          const DetectionScheme& scheme);

struct FringeScan {
  std::vector<double> phis;
  std::vector<double> probs;
  std::vector<double> sigmas;  // empty, or one entry per point
  std::string config_label;
  std::string scheme_label;

  std::string to_csv() const;
  std::string to_json() const;
};

std::vector<double> uniform_grid(int n = kDefaultGridPoints, double lo = 0.0,
                                 double hi = kTwoPi);

FringeScan scan(InputConfig config, const SourceParams& params,
                const DetectionScheme& scheme, const std::vector<double>& phis);

enum class AnalyticKind { P10, P11, P20, P22, Distinguishable11, HollandBurnett };

double analytic_fringe(AnalyticKind kind, double phi, int n_photons = 4);

std::string analytic_kind_name(AnalyticKind kind, int n_photons = 4);

// <n_e n_f> for the ideal N-photon split input, (N/8)(2N - (2+N) sin^2 phi).
double photon_number_product_expectation(int n_photons, double phi);

FringeScan analytic_scan(AnalyticKind kind, const std::vector<double>& phis,
                         int n_photons = 4);

struct ContrastPair {
  double phi_max = 0.0;
  double phi_min = 0.0;
  double p_max = 0.0;
  double p_min = 0.0;
  double contrast = 0.0;
  bool deep = false;  // paired minimum sits nearest phi = k*pi
};

struct ContrastReport {
  double mean_contrast = 0.0;
  std::vector<ContrastPair> pairs;
  std::optional<double> deep_contrast;
  std::optional<double> shallow_contrast;
  std::optional<double> uncertainty;

  std::string to_json() const;
};

// Locates fringe extrema on the scan grid, refines each with a three-point
// parabola, pairs every maximum with its adjacent minima and averages the
// per-pair visibilities. A scan spanning exactly one 2*pi period is treated
// as circular so the boundary extrema pair across the seam.
ContrastReport contrast(const FringeScan& scan);

enum class SweepVar { Indist, G2, EtaC };

std::string sweep_var_name(SweepVar v);
SweepVar sweep_var_from_name(const std::string& name);

std::vector<ContrastReport> parameter_sweep(InputConfig config,
                                            const DetectionScheme& scheme,
                                            SweepVar var,
                                            const std::vector<double>& grid,
                                            SourceParams base = {});

}  // namespace fringelab
