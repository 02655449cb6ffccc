#pragma once

#include <map>

#include "fringelab/fock.hpp"
#include "fringelab/network.hpp"

namespace fringelab {

inline constexpr int kDefaultTruncation = 5;

// output state (over e, f, g with classes) -> complex amplitude
using AmplitudeTable = std::map<LabeledFockState, complexd>;

// Expand an input over modes a/b photon by photon: each a-photon maps to
// (1/sqrt(2))(A e + B f + C g), each b-photon to (1/sqrt(2))(D e + E f + F g);
// same-class photons are collected coherently, classes multiply independently.
// Amplitudes include the input 1/sqrt(n!) and output sqrt(n!) norm factors.
AmplitudeTable propagate(const LabeledFockState& input,
                         const TransferCoefficients& k,
                         int truncation = kDefaultTruncation);

// sum of |amplitude|^2 over outputs with >= min_e photons in e AND >= min_f
// in f; photons in g are unrestricted
double detection_probability(const LabeledFockState& input,
                             const TransferCoefficients& k, int min_e, int min_f,
                             int truncation = kDefaultTruncation);

// probability of exactly e_count photons in e and f_count in f (rest in g)
double exact_output_probability(const LabeledFockState& input,
                                const TransferCoefficients& k, int e_count,
                                int f_count, int truncation = kDefaultTruncation);

// E[n_e * n_f] over the output distribution
double photon_number_product_moment(const LabeledFockState& input,
                                    const TransferCoefficients& k,
                                    int truncation = kDefaultTruncation);

}  // namespace fringelab
