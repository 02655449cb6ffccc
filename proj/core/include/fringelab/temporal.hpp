#pragma once

#include <vector>

#include "fringelab/ensemble.hpp"

namespace fringelab {

// Photon wavepacket: Gaussian excitation pulse of width w_p convolved with an
// exponential decay of lifetime T1, both in picoseconds. Dimensionless time
// is measured in units of w_p.
struct WavepacketParams {
  double T1 = 59.0;
  double w_p = 8.86;

  double K() const { return T1 / w_p; }
  void validate() const;
};

// Normalized exponentially modified Gaussian density at dimensionless x.
double emg_density(double x, double K);

// Amplitude overlap of two wavepackets separated by tau picoseconds,
// integral of sqrt(f(x) f(x - tau/w_p)); equals 1 at tau = 0.
double temporal_overlap(double tau_ps, const WavepacketParams& params);

// Indistinguishability contributed by temporal separation: overlap squared.
double indistinguishability_from_separation(double tau_ps,
                                            const WavepacketParams& params);

struct SeparationContrast {
  double tau_ps = 0.0;
  double overlap = 0.0;
  double indist = 0.0;    // source.indist * overlap^2
  double contrast = 0.0;  // mean two-photon fringe contrast at that indist
};

std::vector<SeparationContrast> contrast_vs_separation(
    const std::vector<double>& tau_grid_ps, const WavepacketParams& params,
    const SourceParams& source);

// Least-squares time constant of values[i] - floor ~ exp(-tau[i]/constant).
double exponential_decay_constant(const std::vector<double>& taus,
                                  const std::vector<double>& values,
                                  double floor);

}  // namespace fringelab
