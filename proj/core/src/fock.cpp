#include "fringelab/fock.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace fringelab {

char spatial_name(Spatial m) { return "abcdefg"[static_cast<int>(m)]; }

Spatial spatial_from_name(char name) {
  if (name < 'a' || name > 'g') {
    throw std::invalid_argument(std::string("unknown spatial mode '") + name + "'");
  }
  return static_cast<Spatial>(name - 'a');
}

void LabeledFockState::add(ModeLabel mode, int n) {
  if (n < 0) throw std::invalid_argument("negative occupation");
  if (mode.cls < 0) throw std::invalid_argument("negative distinguishability class");
  if (n == 0) return;
  occ_[mode] += n;
}

int LabeledFockState::occupation(ModeLabel mode) const {
  auto it = occ_.find(mode);
  return it == occ_.end() ? 0 : it->second;
}

int LabeledFockState::total_photons() const {
  int t = 0;
  for (const auto& [m, n] : occ_) t += n;
  return t;
}

int LabeledFockState::photons_in(Spatial m) const {
  int t = 0;
  for (const auto& [mode, n] : occ_) {
    if (mode.spatial == m) t += n;
  }
  return t;
}

std::map<int, int> LabeledFockState::per_class_totals() const {
  std::map<int, int> totals;
  for (const auto& [mode, n] : occ_) totals[mode.cls] += n;
  return totals;
}

std::string LabeledFockState::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [mode, n] : occ_) {
    std::string key(1, spatial_name(mode.spatial));
    auto& arr = j[key];
    if (!arr.is_array()) arr = nlohmann::json::array();
    while (static_cast<int>(arr.size()) <= mode.cls) arr.push_back(0);
    arr[mode.cls] = n;
  }
  return j.dump();
}

LabeledFockState LabeledFockState::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("state json must be an object");
  LabeledFockState s;
  for (const auto& [key, arr] : j.items()) {
    if (key.size() != 1) throw std::invalid_argument("bad mode key '" + key + "'");
    Spatial m = spatial_from_name(key[0]);
    if (!arr.is_array()) throw std::invalid_argument("mode entry must be an array");
    for (int c = 0; c < static_cast<int>(arr.size()); ++c) {
      s.add({m, c}, arr[c].get<int>());
    }
  }
  return s;
}

std::string LabeledFockState::label() const {
  std::string out = "|";
  bool first = true;
  for (const auto& [mode, n] : occ_) {
    if (!first) out += " ";
    first = false;
    out += std::to_string(n);
    out += "_";
    out += spatial_name(mode.spatial);
    for (int i = 0; i < mode.cls; ++i) out += "'";
  }
  out += ">";
  return out;
}

double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial of negative number");
  static const double table[] = {1., 1., 2., 6., 24., 120., 720., 5040., 40320.,
                                 362880., 3628800., 39916800., 479001600.};
  if (n < static_cast<int>(sizeof(table) / sizeof(table[0]))) return table[n];
  double r = table[12];
  for (int i = 13; i <= n; ++i) r *= i;
  return r;
}

double state_norm_factor(const LabeledFockState& state) {
  double f = 1.0;
  for (const auto& [mode, n] : state.occupations()) f *= factorial(n);
  return 1.0 / std::sqrt(f);
}

namespace {

// distributions of n photons over (e, f, g)
std::vector<std::array<int, 3>> splits(int n) {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n - i; ++j) out.push_back({i, j, n - i - j});
  }
  return out;
}

}  // namespace

std::vector<LabeledFockState> enumerate_output_configs(
    const std::map<int, int>& total_per_class, int min_e, int min_f) {
  if (min_e < 0 || min_f < 0) throw std::invalid_argument("negative detection threshold");
  std::vector<int> classes;
  std::vector<std::vector<std::array<int, 3>>> options;
  for (const auto& [cls, n] : total_per_class) {
    if (n < 0) throw std::invalid_argument("negative photon count");
    classes.push_back(cls);
    options.push_back(splits(n));
  }
  std::vector<LabeledFockState> result;
  std::vector<std::array<int, 3>> chosen(classes.size());
  auto emit = [&]() {
    int te = 0, tf = 0;
    for (const auto& s : chosen) {
      te += s[0];
      tf += s[1];
    }
    if (te < min_e || tf < min_f) return;
    LabeledFockState st;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      st.add({Spatial::e, classes[i]}, chosen[i][0]);
      st.add({Spatial::f, classes[i]}, chosen[i][1]);
      st.add({Spatial::g, classes[i]}, chosen[i][2]);
    }
    result.push_back(std::move(st));
  };
  // iterative cross product over per-class splits
  std::vector<std::size_t> idx(classes.size(), 0);
  if (classes.empty()) {
    if (min_e == 0 && min_f == 0) result.push_back(LabeledFockState{});
    return result;
  }
  while (true) {
    for (std::size_t i = 0; i < classes.size(); ++i) chosen[i] = options[i][idx[i]];
    emit();
    std::size_t k = 0;
    while (k < idx.size()) {
      if (++idx[k] < options[k].size()) break;
      idx[k] = 0;
      ++k;
    }
    if (k == idx.size()) break;
  }
  return result;
}

}  // namespace fringelab
