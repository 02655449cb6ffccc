#include "fringelab/propagator.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fringelab {

namespace {

struct ClassCounts {
  int cls;
  int na;  // photons entering in mode a
  int nb;  // photons entering in mode b
};

std::vector<ClassCounts> gather_classes(const LabeledFockState& input, int truncation) {
  std::map<int, ClassCounts> by_class;
  int total = 0;
  for (const auto& [mode, n] : input.occupations()) {
    if (mode.spatial != Spatial::a && mode.spatial != Spatial::b) {
      throw std::invalid_argument("input state may occupy modes a and b only");
    }
    auto& cc = by_class[mode.cls];
    cc.cls = mode.cls;
    (mode.spatial == Spatial::a ? cc.na : cc.nb) += n;
    total += n;
  }
  if (total > truncation) {
    throw std::invalid_argument("input exceeds photon-number truncation (" +
                                std::to_string(total) + " > " +
                                std::to_string(truncation) + ")");
  }
  std::vector<ClassCounts> out;
  out.reserve(by_class.size());
  for (const auto& [c, cc] : by_class) out.push_back(cc);
  return out;
}

struct Split {
  std::array<int, 3> efg;
  complexd amp;
};

// multinomial expansion of (x e + y f + z g)^n, with the n! collection factor
std::vector<Split> expand(int n, complexd x, complexd y, complexd z) {
  std::vector<Split> out;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n - i; ++j) {
      int k = n - i - j;
      double mult = factorial(n) / (factorial(i) * factorial(j) * factorial(k));
      complexd amp = mult;
      for (int t = 0; t < i; ++t) amp *= x;
      for (int t = 0; t < j; ++t) amp *= y;
      for (int t = 0; t < k; ++t) amp *= z;
      out.push_back({{i, j, k}, amp});
    }
  }
  return out;
}

// one class: convolve the a- and b-photon expansions, then fold in every
// per-class normalization factor (input 1/sqrt(n!), output sqrt(n!))
std::vector<Split> class_table(const ClassCounts& cc, const TransferCoefficients& k) {
  const double r2 = TransferCoefficients::per_photon_prefactor;
  auto pa = expand(cc.na, k.A * r2, k.B * r2, k.C * r2);
  auto pb = expand(cc.nb, k.D * r2, k.E * r2, k.F * r2);
  std::map<std::array<int, 3>, complexd> conv;
  for (const auto& sa : pa) {
    for (const auto& sb : pb) {
      std::array<int, 3> key{sa.efg[0] + sb.efg[0], sa.efg[1] + sb.efg[1],
                             sa.efg[2] + sb.efg[2]};
      conv[key] += sa.amp * sb.amp;
    }
  }
  const double in_norm = 1.0 / std::sqrt(factorial(cc.na) * factorial(cc.nb));
  std::vector<Split> out;
  out.reserve(conv.size());
  for (const auto& [efg, amp] : conv) {
    double out_norm =
        std::sqrt(factorial(efg[0]) * factorial(efg[1]) * factorial(efg[2]));
    out.push_back({efg, amp * in_norm * out_norm});
  }
  return out;
}

template <typename Fn>
void for_each_output(const LabeledFockState& input, const TransferCoefficients& k,
                     int truncation, Fn&& fn) {
  auto classes = gather_classes(input, truncation);
  std::vector<std::vector<Split>> tables;
  tables.reserve(classes.size());
  for (const auto& cc : classes) tables.push_back(class_table(cc, k));

  std::vector<std::size_t> idx(classes.size(), 0);
  if (classes.empty()) {
    fn(std::vector<const Split*>{}, std::vector<int>{});
    return;
  }
  std::vector<const Split*> picked(classes.size());
  std::vector<int> cls_ids(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) cls_ids[i] = classes[i].cls;
  while (true) {
    for (std::size_t i = 0; i < classes.size(); ++i) picked[i] = &tables[i][idx[i]];
    fn(picked, cls_ids);
    std::size_t c = 0;
    while (c < idx.size()) {
      if (++idx[c] < tables[c].size()) break;
      idx[c] = 0;
      ++c;
    }
    if (c == idx.size()) break;
  }
}

}  // namespace

AmplitudeTable propagate(const LabeledFockState& input, const TransferCoefficients& k,
                         int truncation) {
  AmplitudeTable table;
  for_each_output(input, k, truncation,
                  [&](const std::vector<const Split*>& picked,
                      const std::vector<int>& cls_ids) {
                    LabeledFockState out;
                    complexd amp{1.0, 0.0};
                    for (std::size_t i = 0; i < picked.size(); ++i) {
                      out.add({Spatial::e, cls_ids[i]}, picked[i]->efg[0]);
                      out.add({Spatial::f, cls_ids[i]}, picked[i]->efg[1]);
                      out.add({Spatial::g, cls_ids[i]}, picked[i]->efg[2]);
                      amp *= picked[i]->amp;
                    }
                    table[out] += amp;
                  });
  return table;
}

namespace {

// Distinct (e, f, g) class splits are orthogonal outputs, so probabilities
// convolve across classes; this avoids materializing the full state table.
// per-class marginal over (n_e, n_f): entries summed over g implicitly
std::vector<std::map<std::array<int, 2>, double>> class_prob_tables(
    const LabeledFockState& input, const TransferCoefficients& k, int truncation) {
  auto classes = gather_classes(input, truncation);
  std::vector<std::map<std::array<int, 2>, double>> out;
  out.reserve(classes.size());
  for (const auto& cc : classes) {
    std::map<std::array<int, 2>, double> probs;
    for (const auto& split : class_table(cc, k)) {
      probs[{split.efg[0], split.efg[1]}] += std::norm(split.amp);
    }
    out.push_back(std::move(probs));
  }
  return out;
}

template <typename Accept>
double filtered_probability(const LabeledFockState& input,
                            const TransferCoefficients& k, int truncation,
                            Accept&& accept) {
  auto tables = class_prob_tables(input, k, truncation);
  // running joint distribution over (total_e, total_f)
  std::map<std::array<int, 2>, double> joint{{{0, 0}, 1.0}};
  for (const auto& t : tables) {
    std::map<std::array<int, 2>, double> next;
    for (const auto& [ef, p] : joint) {
      for (const auto& [def, dp] : t) {
        next[{ef[0] + def[0], ef[1] + def[1]}] += p * dp;
      }
    }
    joint = std::move(next);
  }
  double total = 0.0;
  for (const auto& [ef, p] : joint) {
    if (accept(ef[0], ef[1])) total += p;
  }
  return total;
}

}  // namespace

double detection_probability(const LabeledFockState& input,
                             const TransferCoefficients& k, int min_e, int min_f,
                             int truncation) {
  if (min_e < 0 || min_f < 0) throw std::invalid_argument("negative detection threshold");
  return filtered_probability(input, k, truncation,
                              [&](int e, int f) { return e >= min_e && f >= min_f; });
}

double exact_output_probability(const LabeledFockState& input,
                                const TransferCoefficients& k, int e_count,
                                int f_count, int truncation) {
  if (e_count < 0 || f_count < 0) throw std::invalid_argument("negative photon count");
  return filtered_probability(
      input, k, truncation, [&](int e, int f) { return e == e_count && f == f_count; });
}

double photon_number_product_moment(const LabeledFockState& input,
                                    const TransferCoefficients& k, int truncation) {
  auto tables = class_prob_tables(input, k, truncation);
  std::map<std::array<int, 2>, double> joint{{{0, 0}, 1.0}};
  for (const auto& t : tables) {
    std::map<std::array<int, 2>, double> next;
    for (const auto& [ef, p] : joint) {
      for (const auto& [def, dp] : t) {
        next[{ef[0] + def[0], ef[1] + def[1]}] += p * dp;
      }
    }
    joint = std::move(next);
  }
  double m = 0.0;
  for (const auto& [ef, p] : joint) m += static_cast<double>(ef[0]) * ef[1] * p;
  return m;
}

}  // namespace fringelab
