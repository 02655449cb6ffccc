#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fringelab/fock.hpp"
#include "fringelab/network.hpp"
#include "fringelab/propagator.hpp"

namespace fringelab {

struct ParamFlags {  // true = held fixed during fitting
  bool g2{true};
  bool indist{true};
  bool eta_c{true};
  bool eta_d{true};
  bool eta_e{true};
  bool eta_f{true};
};

struct SourceParams {
  double g2{0.0};      // multi-photon emission probability
  double indist{1.0};  // wavepacket overlap of successive photons
  double eta_c{1.0};
  double eta_d{1.0};
  double eta_e{1.0};
  double eta_f{1.0};
  ParamFlags fixed{};  // fitting flags; ignored by all physics

  NetworkParams network(double phi) const;
  SourceParams without_losses() const;  // all eta -> 1
  // throws when any parameter leaves [0,1]; returns true ("warn") when
  // g2 > 0.1, where the truncated model starts to lose validity
  bool validate() const;
};

enum class InputConfig { Ket10, Ket11, Ket20, Ket22 };

std::string config_name(InputConfig c);
InputConfig config_from_name(const std::string& name);
int photons_per_trial(InputConfig c);  // 1, 2, 2, 4

struct WeightedEnsemble {
  std::vector<std::pair<LabeledFockState, double>> entries;
  InputConfig config{InputConfig::Ket10};
  SourceParams params{};

  double weight_sum() const;
  int max_photons() const;
  std::string to_json() const;
};

// The mixed input for a target configuration: every pure state the source can
// deliver (multi-photon leakage, failed interference splittings) with its
// weight. Weights follow the source model literally, including the 1/2 and
// 1/4 state-preparation factors, so they need not sum to 1; renormalize
// divides them by their sum for theoretical studies.
WeightedEnsemble build_ensemble(InputConfig config, const SourceParams& params,
                                bool renormalize = false);

// sum of alpha * detection_probability over the ensemble; the photon-number
// truncation is widened to the largest entry in the ensemble
double ensemble_probability(const WeightedEnsemble& ens, const TransferCoefficients& k,
                            int min_e, int min_f);

// same weighting with exact output counts instead of at-least thresholds
double ensemble_exact_probability(const WeightedEnsemble& ens,
                                  const TransferCoefficients& k, int e_count,
                                  int f_count);

}  // namespace fringelab
