#include "fringelab/network.hpp"

#include <cmath>
#include <stdexcept>

namespace fringelab {

namespace {
constexpr double kR2 = 0.70710678118654752440;  // 1/sqrt(2)
const complexd kI{0.0, 1.0};

void check_eta(double eta, const char* name) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
  }
}
}  // namespace

void NetworkParams::validate() const {
  if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
  check_eta(eta_c, "eta_c");
  check_eta(eta_d, "eta_d");
  check_eta(eta_e, "eta_e");
  check_eta(eta_f, "eta_f");
}

Mat2c beamsplitter_matrix() {
  return {{{complexd{kR2, 0.0}, kI * kR2}, {kI * kR2, complexd{kR2, 0.0}}}};
}

Mat2c phase_matrix(double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
  return {{{complexd{1.0, 0.0}, 0.0}, {0.0, std::exp(kI * phi)}}};
}

Mat2c loss_matrix(double eta) {
  check_eta(eta, "eta");
  return {{{complexd{eta, 0.0}, complexd{1.0 - eta, 0.0}},
           {complexd{1.0 - eta, 0.0}, complexd{eta, 0.0}}}};
}

TransferCoefficients transfer_coefficients(const NetworkParams& params,
                                           LossConvention conv) {
  params.validate();
  double tc = params.eta_c, td = params.eta_d, te = params.eta_e, tf = params.eta_f;
  double lc = 1.0 - tc, ld = 1.0 - td, le = 1.0 - te, lf = 1.0 - tf;
  if (conv == LossConvention::Amplitude) {
    tc = std::sqrt(tc);
    td = std::sqrt(td);
    te = std::sqrt(te);
    tf = std::sqrt(tf);
    lc = std::sqrt(lc);
    ld = std::sqrt(ld);
    le = std::sqrt(le);
    lf = std::sqrt(lf);
  }
  const complexd ep = std::exp(kI * params.phi);
  // half-difference / half-sum of the two arm amplitudes after the second
  // beamsplitter; these feed both the detected modes and their loss terms
  const complexd u = tc * kR2 - td * ep * kR2;
  const complexd v = kI * tc * kR2 + kI * td * ep * kR2;
  TransferCoefficients k;
  k.A = te * u;
  k.B = tf * v;
  k.C = lc + kI * ep * ld + le * u + lf * v;
  k.D = te * v;
  k.E = tf * (td * ep * kR2 - tc * kR2);
  k.F = kI * lc + ep * ld + le * v + lf * (td * ep * kR2 - tc * kR2);
  return k;
}

}  // namespace fringelab
