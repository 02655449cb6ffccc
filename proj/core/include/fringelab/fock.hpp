#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fringelab {

// Spatial modes: a, b are interferometer inputs; c, d the internal arms;
// e, f the detected outputs; g collects everything lost along the way.
enum class Spatial : std::uint8_t { a, b, c, d, e, f, g };

char spatial_name(Spatial m);
Spatial spatial_from_name(char name);

// Photons interfere only within the same distinguishability class; the class
// index is an opaque identifier (0 = reference class, 1, 2, ... mutually
// distinguishable, mirroring prime ticks a', a'', ...).
struct ModeLabel {
  Spatial spatial{Spatial::a};
  int cls{0};
  auto operator<=>(const ModeLabel&) const = default;
};

// Occupation counts per (spatial mode, class). Zero entries are never stored,
// so equality and ordering are structural. Immutable in spirit: build once.
class LabeledFockState {
 public:
  LabeledFockState() = default;

  void add(ModeLabel mode, int n);
  int occupation(ModeLabel mode) const;
  int total_photons() const;
  int photons_in(Spatial m) const;
  std::map<int, int> per_class_totals() const;
  const std::map<ModeLabel, int>& occupations() const { return occ_; }

  // compact form {"a":[2,1],"b":[2]}: array index = class, value = count
  std::string to_json() const;
  static LabeledFockState from_json(const std::string& text);
  // human-readable |2_a 1_a' 2_b> form for reports
  std::string label() const;

  auto operator<=>(const LabeledFockState&) const = default;

 private:
  std::map<ModeLabel, int> occ_;
};

double factorial(int n);

// prod over (mode, class) of 1/sqrt(n!)
double state_norm_factor(const LabeledFockState& state);

// Every way of distributing each class's photons over {e, f, g} such that
// total e-photons >= min_e and total f-photons >= min_f; g is unrestricted.
std::vector<LabeledFockState> enumerate_output_configs(
    const std::map<int, int>& total_per_class, int min_e, int min_f);

}  // namespace fringelab
