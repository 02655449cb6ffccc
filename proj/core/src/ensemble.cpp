#include "fringelab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace fringelab {

NetworkParams SourceParams::network(double phi) const {
  return NetworkParams{phi, eta_c, eta_d, eta_e, eta_f};
}

SourceParams SourceParams::without_losses() const {
  SourceParams p = *this;
  p.eta_c = p.eta_d = p.eta_e = p.eta_f = 1.0;
  return p;
}

bool SourceParams::validate() const {
  auto in01 = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
    }
  };
  in01(g2, "g2");
  in01(indist, "indistinguishability");
  in01(eta_c, "eta_c");
  in01(eta_d, "eta_d");
  in01(eta_e, "eta_e");
  in01(eta_f, "eta_f");
  return g2 > 0.1;
}

std::string config_name(InputConfig c) {
  switch (c) {
    case InputConfig::Ket10: return "Ket10";
    case InputConfig::Ket11: return "Ket11";
    case InputConfig::Ket20: return "Ket20";
    case InputConfig::Ket22: return "Ket22";
  }
  throw std::invalid_argument("unsupported input configuration");
}

InputConfig config_from_name(const std::string& name) {
  if (name == "Ket10" || name == "10") return InputConfig::Ket10;
  if (name == "Ket11" || name == "11") return InputConfig::Ket11;
  if (name == "Ket20" || name == "20") return InputConfig::Ket20;
  if (name == "Ket22" || name == "22") return InputConfig::Ket22;
  throw std::invalid_argument("unknown input configuration '" + name + "'");
}

int photons_per_trial(InputConfig c) {
  switch (c) {
    case InputConfig::Ket10: return 1;
    case InputConfig::Ket11: return 2;
    case InputConfig::Ket20: return 2;
    case InputConfig::Ket22: return 4;
  }
  throw std::invalid_argument("unsupported input configuration");
}

double WeightedEnsemble::weight_sum() const {
  double s = 0.0;
  for (const auto& [st, a] : entries) s += a;
  return s;
}

int WeightedEnsemble::max_photons() const {
  int m = 0;
  for (const auto& [st, a] : entries) m = std::max(m, st.total_photons());
  return m;
}

std::string WeightedEnsemble::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [st, a] : entries) {
    arr.push_back({{"state", nlohmann::json::parse(st.to_json())}, {"alpha", a}});
  }
  return arr.dump();
}

namespace {

// occupancy shorthand: {mode, class, count}
LabeledFockState make_state(std::initializer_list<std::array<int, 3>> occs) {
  LabeledFockState s;
  for (const auto& o : occs) {
    s.add({static_cast<Spatial>(o[0]), o[1]}, o[2]);
  }
  return s;
}

constexpr int A = static_cast<int>(Spatial::a);
constexpr int B = static_cast<int>(Spatial::b);

using Entry = std::pair<LabeledFockState, double>;

// Weight tables, transcribed term by term. g is the multi-photon probability
// itself; primes map to classes (equal prime counts in a and b share a class,
// the double/triple ticks get fresh ones).
std::vector<Entry> table_ket10(double g, double /*ind*/) {
  return {
      {make_state({{A, 0, 1}}), 1.0 - g},
      {make_state({{A, 0, 1}, {A, 1, 1}}), g},
  };
}

std::vector<Entry> table_ket11(double g, double ind) {
  const double q = 1.0 - g;
  const double d = 1.0 - ind;
  return {
      {make_state({{A, 0, 1}, {B, 0, 1}}), ind * q * q},
      {make_state({{A, 0, 1}, {B, 1, 1}}), d * q * q},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 0, 1}}), ind * g * q},
      {make_state({{A, 0, 1}, {B, 0, 1}, {B, 1, 1}}), ind * g * q},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 0, 1}, {B, 2, 1}}), ind * g * g},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 2, 1}}), d * g * q},
      {make_state({{A, 0, 1}, {B, 1, 1}, {B, 2, 1}}), d * g * q},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 2, 1}, {B, 3, 1}}), d * g * g},
  };
}

std::vector<Entry> table_ket20(double g, double ind) {
  const double q = 1.0 - g;
  const double d = 1.0 - ind;
  return {
      {make_state({{A, 0, 2}}), ind * q * q},
      {make_state({{A, 0, 1}, {A, 1, 1}}), 0.5 * d * q * q},
      {make_state({{A, 0, 2}, {A, 1, 1}}), 2.0 * ind * g * q},
      {make_state({{A, 0, 2}, {A, 1, 1}, {A, 2, 1}}), ind * g * g},
      {make_state({{A, 0, 1}, {A, 1, 1}, {A, 2, 1}}), d * g * q},
      {make_state({{A, 0, 1}, {A, 1, 1}, {A, 2, 1}, {A, 3, 1}}), 0.5 * d * g * g},
  };
}

std::vector<Entry> table_ket22(double g, double ind) {
  const double q = 1.0 - g;
  const double d = 1.0 - ind;
  const double q2 = q * q;
  const double q3 = q2 * q;
  const double q4 = q2 * q2;
  return {
      {make_state({{A, 0, 2}, {B, 0, 2}}), ind * ind * q4},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 2, 1}, {B, 3, 1}}), 0.25 * d * d * q4},
      {make_state({{A, 0, 2}, {A, 1, 1}, {B, 0, 2}}), 2.0 * ind * ind * g * q3},
      {make_state({{A, 0, 2}, {B, 0, 2}, {B, 1, 1}}), 2.0 * ind * ind * g * q3},
      {make_state({{A, 0, 2}, {A, 1, 1}, {B, 0, 2}, {B, 2, 1}}),
       4.0 * ind * ind * g * g * q2},
      {make_state({{A, 0, 1}, {A, 1, 1}, {A, 2, 1}, {B, 3, 1}, {B, 4, 1}}),
       0.5 * d * d * g * q3},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 2, 1}, {B, 3, 1}, {B, 4, 1}}),
       0.5 * d * d * g * q3},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 0, 2}}), d * ind * ind * q4},
      {make_state({{A, 0, 2}, {B, 0, 1}, {B, 1, 1}}), d * ind * ind * q4},
      {make_state({{A, 0, 1}, {A, 1, 1}, {B, 0, 1}, {B, 1, 1}}), d * d * ind * q4},
  };
}

}  // namespace

WeightedEnsemble build_ensemble(InputConfig config, const SourceParams& params,
                                bool renormalize) {
  params.validate();
  std::vector<Entry> raw;
  switch (config) {
    case InputConfig::Ket10: raw = table_ket10(params.g2, params.indist); break;
    case InputConfig::Ket11: raw = table_ket11(params.g2, params.indist); break;
    case InputConfig::Ket20: raw = table_ket20(params.g2, params.indist); break;
    case InputConfig::Ket22: raw = table_ket22(params.g2, params.indist); break;
    default: throw std::invalid_argument("unsupported input configuration");
  }
  WeightedEnsemble ens;
  ens.config = config;
  ens.params = params;
  for (auto& e : raw) {
    if (e.second > 0.0) ens.entries.push_back(std::move(e));
  }
  if (renormalize) {
    double s = ens.weight_sum();
    if (s <= 0.0) throw std::invalid_argument("ensemble weight sum is zero");
    for (auto& [st, a] : ens.entries) a /= s;
  }
  return ens;
}

double ensemble_probability(const WeightedEnsemble& ens, const TransferCoefficients& k,
                            int min_e, int min_f) {
  const int trunc = std::max(kDefaultTruncation, ens.max_photons());
  double p = 0.0;
  for (const auto& [st, a] : ens.entries) {
    p += a * detection_probability(st, k, min_e, min_f, trunc);
  }
  return p;
}

double ensemble_exact_probability(const WeightedEnsemble& ens,
                                  const TransferCoefficients& k, int e_count,
                                  int f_count) {
  const int trunc = std::max(kDefaultTruncation, ens.max_photons());
  double p = 0.0;
  for (const auto& [st, a] : ens.entries) {
    p += a * exact_output_probability(st, k, e_count, f_count, trunc);
  }
  return p;
}

}  // namespace fringelab
