#include "fringelab/fitsolver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

namespace fringelab {

namespace {

constexpr double kLogitClamp = 1e-7;

struct ParamRef {
  const char* name;
  double SourceParams::* value;
  bool ParamFlags::* fixed;
};

constexpr ParamRef kParamRefs[] = {
    {"g2", &SourceParams::g2, &ParamFlags::g2},
    {"indistinguishability", &SourceParams::indist, &ParamFlags::indist},
    {"eta_c", &SourceParams::eta_c, &ParamFlags::eta_c},
    {"eta_d", &SourceParams::eta_d, &ParamFlags::eta_d},
    {"eta_e", &SourceParams::eta_e, &ParamFlags::eta_e},
    {"eta_f", &SourceParams::eta_f, &ParamFlags::eta_f},
};

double logit(double p) {
  p = std::clamp(p, kLogitClamp, 1.0 - kLogitClamp);
  return std::log(p / (1.0 - p));
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// The free parameter vector: logit-transformed physics parameters, then
// log(scale), then (optionally) the raw offset.
struct Transform {
  std::vector<const ParamRef*> physics;
  bool with_offset = false;

  int size() const {
    return static_cast<int>(physics.size()) + 1 + (with_offset ? 1 : 0);
  }

  Eigen::VectorXd pack(const SourceParams& p, double scale, double offset) const {
    Eigen::VectorXd u(size());
    int i = 0;
    for (const auto* ref : physics) u[i++] = logit(p.*(ref->value));
    u[i++] = std::log(scale);
    if (with_offset) u[i] = offset;
    return u;
  }

  void unpack(const Eigen::VectorXd& u, SourceParams& p, double& scale,
              double& offset) const {
    int i = 0;
    for (const auto* ref : physics) p.*(ref->value) = sigmoid(u[i++]);
    scale = std::exp(u[i++]);
    if (with_offset) offset = u[i];
  }

  std::string name_of(int i) const {
    if (i < static_cast<int>(physics.size())) return physics[i]->name;
    if (i == static_cast<int>(physics.size())) return "scale";
    return "offset";
  }

  // |d(physical)/d(u_i)| at u, for converting curvature uncertainties
  double jacobian_factor(const Eigen::VectorXd& u, int i) const {
    if (i < static_cast<int>(physics.size())) {
      const double s = sigmoid(u[i]);
      return s * (1.0 - s);
    }
    if (i == static_cast<int>(physics.size())) return std::exp(u[i]);
    return 1.0;
  }
};

struct Model {
  const FitProblem& problem;
  const Transform& transform;
  std::vector<double> sigmas;

  std::vector<double> curve(const SourceParams& p) const {
    const WeightedEnsemble ens = build_ensemble(problem.config, p);
    std::vector<double> out(problem.data.phi.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto tc = transfer_coefficients(p.network(problem.data.phi[i]));
      out[i] = scheme_probability(ens, tc, problem.scheme);
    }
    return out;
  }

  Eigen::VectorXd residuals(const Eigen::VectorXd& u) const {
    SourceParams p = problem.params;
    double scale = 1.0;
    double offset = 0.0;
    transform.unpack(u, p, scale, offset);
    if (!transform.with_offset) offset = problem.offset;
    const auto m = curve(p);
    Eigen::VectorXd r(static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          (problem.data.value[i] - (scale * m[i] + offset)) / sigmas[i];
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const {
    const int m = transform.size();
    Eigen::MatrixXd J(static_cast<Eigen::Index>(sigmas.size()), m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(u[j]));
      Eigen::VectorXd up = u;
      Eigen::VectorXd dn = u;
      up[j] += h;
      dn[j] -= h;
      J.col(j) = (residuals(up) - residuals(dn)) / (2.0 * h);
    }
    return J;
  }
};

[[noreturn]] void throw_singular(const Eigen::FullPivLU<Eigen::MatrixXd>& lu,
                                 const Transform& transform) {
  const Eigen::MatrixXd null_space = lu.kernel();
  std::string names;
  for (int i = 0; i < null_space.rows(); ++i) {
    if (null_space.row(i).cwiseAbs().maxCoeff() > 1e-6) {
      if (!names.empty()) names += ", ";
      names += transform.name_of(i);
    }
  }
  if (names.empty()) names = "(unidentified)";
  throw std::runtime_error("singular fit curvature; mutually dependent parameters: " +
                           names);
}

}  // namespace

FitResult fit(const FitProblem& problem) {
  const auto& data = problem.data;
  if (data.phi.size() != data.value.size() || data.phi.empty()) {
    throw std::invalid_argument("fit data phases and values differ in length");
  }
  if (!data.sigma.empty() && data.sigma.size() != data.phi.size()) {
    throw std::invalid_argument("fit data sigmas differ in length");
  }
  problem.params.validate();

  Transform transform;
  transform.with_offset = !problem.offset_fixed;
  for (const auto& ref : kParamRefs) {
    if (!(problem.params.fixed.*(ref.fixed))) transform.physics.push_back(&ref);
  }

  Model model{problem, transform, {}};
  model.sigmas.resize(data.value.size());
  for (std::size_t i = 0; i < data.value.size(); ++i) {
    model.sigmas[i] = data.sigma.empty()
                          ? std::sqrt(std::max(data.value[i], 1.0))
                          : data.sigma[i];
    if (!(model.sigmas[i] > 0.0)) {
      throw std::invalid_argument("fit data sigmas must be positive");
    }
  }

  double scale0 = problem.scale;
  if (!(scale0 > 0.0)) {
    const auto m0 = model.curve(problem.params);
    const double mmax = *std::max_element(m0.begin(), m0.end());
    const double ymax = *std::max_element(data.value.begin(), data.value.end());
    scale0 = mmax > 0.0 && ymax > 0.0 ? ymax / mmax : 1.0;
  }

  Eigen::VectorXd u = transform.pack(problem.params, scale0, problem.offset);
  Eigen::VectorXd r = model.residuals(u);
  double chi2 = r.squaredNorm();

  const int m = transform.size();
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  double gradient_norm = 0.0;

  Eigen::MatrixXd J;
  Eigen::MatrixXd A;
  Eigen::VectorXd g;
  bool refresh = true;

  for (; iter < problem.max_iterations && !converged; ++iter) {
    if (refresh) {
      J = model.jacobian(u);
      A = J.transpose() * J;
      g = J.transpose() * r;
      refresh = false;
    }
    gradient_norm = g.cwiseAbs().maxCoeff();
    if (gradient_norm < 1e-10) {
      converged = true;
      break;
    }
    Eigen::MatrixXd damped = A;
    for (int j = 0; j < m; ++j) {
      damped(j, j) += lambda * std::max(A(j, j), 1e-12);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    if (!step.allFinite()) {
      lambda *= 7.0;
      continue;
    }
    const Eigen::VectorXd u_try = u + step;
    const Eigen::VectorXd r_try = model.residuals(u_try);
    const double chi2_try = r_try.squaredNorm();
    if (chi2_try < chi2) {
      const double gain = chi2 - chi2_try;
      u = u_try;
      r = r_try;
      chi2 = chi2_try;
      lambda = std::max(lambda / 3.0, 1e-12);
      refresh = true;
      if (gain < 1e-12 * (1.0 + chi2) &&
          step.cwiseAbs().maxCoeff() < 1e-9 * (1.0 + u.cwiseAbs().maxCoeff())) {
        converged = true;
      }
    } else {
      lambda *= 7.0;
      if (lambda > 1e15) {
        // cannot improve further at numerical precision
        converged = true;
      }
    }
  }
  if (!converged) {
    throw std::runtime_error("fit did not converge within " +
                             std::to_string(problem.max_iterations) +
                             " iterations");
  }

  FitResult result;
  result.best = problem.params;
  transform.unpack(u, result.best, result.scale, result.offset);
  if (!transform.with_offset) result.offset = problem.offset;
  result.chi2 = chi2;
  const int dof = std::max<int>(1, static_cast<int>(data.phi.size()) - m);
  result.reduced_chi2 = chi2 / dof;
  result.iterations = iter;
  result.gradient_norm = gradient_norm;
  result.converged = converged;

  J = model.jacobian(u);
  A = J.transpose() * J;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < m) throw_singular(lu, transform);
  const Eigen::MatrixXd cov = lu.inverse() * result.reduced_chi2;
  for (int j = 0; j < m; ++j) {
    const double sigma_u = std::sqrt(std::max(cov(j, j), 0.0));
    result.uncertainties[transform.name_of(j)] =
        sigma_u * transform.jacobian_factor(u, j);
  }
  return result;
}

std::string FitResult::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  const double values[] = {best.g2,    best.indist, best.eta_c,
                           best.eta_d, best.eta_e,  best.eta_f};
  int i = 0;
  for (const auto& ref : kParamRefs) {
    const auto it = uncertainties.find(ref.name);
    params.push_back({{"parameter", ref.name},
                      {"value", values[i++]},
                      {"sigma", it == uncertainties.end()
                                    ? nlohmann::json(nullptr)
                                    : nlohmann::json(it->second)},
                      {"fixed", it == uncertainties.end()}});
  }
  nlohmann::json j;
  j["parameters"] = params;
  j["scale"] = scale;
  const auto sit = uncertainties.find("scale");
  j["scale_sigma"] = sit == uncertainties.end() ? nlohmann::json(nullptr)
                                                : nlohmann::json(sit->second);
  j["offset"] = offset;
  j["chi2"] = chi2;
  j["reduced_chi2"] = reduced_chi2;
  j["iterations"] = iterations;
  j["gradient_norm"] = gradient_norm;
  j["converged"] = converged;
  return j.dump();
}

namespace {

FitProblem stage_problem(InputConfig config, const FitData& data,
                         const DetectionScheme& scheme, const SourceParams& params,
                         int max_iterations) {
  FitProblem p;
  p.data = data;
  p.config = config;
  p.scheme = scheme;
  p.params = params;
  p.max_iterations = max_iterations;
  return p;
}

}  // namespace

StagedResult staged_workflow(const std::map<InputConfig, FitData>& datasets,
                             const StagedOptions& options) {
  if (!datasets.count(InputConfig::Ket10)) {
    throw std::invalid_argument("staged workflow requires single-photon data");
  }
  const InputConfig order[] = {InputConfig::Ket10, InputConfig::Ket20,
                               InputConfig::Ket11, InputConfig::Ket22};
  bool have_previous = true;
  for (const auto config : order) {
    if (datasets.count(config) && !have_previous) {
      throw std::invalid_argument("staged workflow: dataset for " +
                                  config_name(config) +
                                  " requires every earlier stage");
    }
    have_previous = have_previous && datasets.count(config) > 0;
  }

  StagedResult out;

  // stage 1: single photon pins eta_d; detector efficiency is degenerate
  // with the free scale, so eta_e stays at 1
  SourceParams p1;
  p1.g2 = 0.0;
  p1.indist = 1.0;
  p1.eta_c = options.eta_c_fixed;
  p1.eta_d = 0.5;
  p1.eta_e = 1.0;
  p1.eta_f = 1.0;
  p1.fixed = ParamFlags{};
  p1.fixed.eta_d = false;
  out.stages[InputConfig::Ket10] =
      fit(stage_problem(InputConfig::Ket10, datasets.at(InputConfig::Ket10),
                        DetectionScheme::at_least(1, 0), p1,
                        options.max_iterations));
  out.combined = out.stages[InputConfig::Ket10].best;
  out.combined.fixed = ParamFlags{};

  // stage 2: two photons in one mode split the detector arms.  Later stages
  // start from earlier estimates; the measurements were taken sequentially
  // and the fringe shape identifies eta_d only locally (the visibility is
  // symmetric under eta_d/eta_c inversion).
  if (datasets.count(InputConfig::Ket20)) {
    SourceParams p2;
    p2.g2 = options.g2_fixed;
    p2.indist = 1.0;  // held at 1 for the single-mode stage
    p2.eta_c = options.eta_c_fixed;
    p2.eta_d = out.combined.eta_d;
    p2.eta_e = options.eta_e_ket20;
    p2.eta_f = options.eta_e_ket20;
    p2.fixed = ParamFlags{};
    p2.fixed.eta_d = false;
    p2.fixed.eta_f = false;
    out.stages[InputConfig::Ket20] =
        fit(stage_problem(InputConfig::Ket20, datasets.at(InputConfig::Ket20),
                          DetectionScheme::at_least(1, 1), p2,
                          options.max_iterations));
    const auto& best = out.stages[InputConfig::Ket20].best;
    out.combined.eta_d = best.eta_d;
    out.combined.eta_e = best.eta_e;
    out.combined.eta_f = best.eta_f;
    out.combined.g2 = options.g2_fixed;
  }

  // stage 3: two-mode pairs fit the indistinguishability
  if (datasets.count(InputConfig::Ket11)) {
    SourceParams p3 = out.combined;
    p3.g2 = options.g2_fixed;
    p3.indist = 0.5;
    p3.fixed = ParamFlags{};
    p3.fixed.indist = false;
    out.stages[InputConfig::Ket11] =
        fit(stage_problem(InputConfig::Ket11, datasets.at(InputConfig::Ket11),
                          DetectionScheme::at_least(1, 1), p3,
                          options.max_iterations));
    out.combined.indist = out.stages[InputConfig::Ket11].best.indist;

    if (options.crosscheck_g2) {
      SourceParams px = out.combined;
      px.g2 = 0.05;
      px.fixed = ParamFlags{};
      px.fixed.g2 = false;
      out.g2_crosscheck =
          fit(stage_problem(InputConfig::Ket11, datasets.at(InputConfig::Ket11),
                            DetectionScheme::at_least(1, 1), px,
                            options.max_iterations));
    }
  }

  // stage 4: four-photon data fixes the remaining detector efficiency,
  // starting from its partner arm's estimate
  if (datasets.count(InputConfig::Ket22)) {
    SourceParams p4 = out.combined;
    p4.g2 = options.g2_fixed;
    p4.eta_e = out.combined.eta_f;
    p4.fixed = ParamFlags{};
    p4.fixed.eta_e = false;
    out.stages[InputConfig::Ket22] =
        fit(stage_problem(InputConfig::Ket22, datasets.at(InputConfig::Ket22),
                          DetectionScheme::at_least(3, 1), p4,
                          options.max_iterations));
    out.combined.eta_e = out.stages[InputConfig::Ket22].best.eta_e;
  }
  return out;
}

std::string StagedResult::to_json() const {
  nlohmann::json j;
  for (const auto& [config, result] : stages) {
    j["stages"][config_name(config)] = nlohmann::json::parse(result.to_json());
  }
  if (g2_crosscheck) {
    j["g2_crosscheck"] = nlohmann::json::parse(g2_crosscheck->to_json());
  }
  j["combined"] = {{"g2", combined.g2},       {"indistinguishability", combined.indist},
                   {"eta_c", combined.eta_c}, {"eta_d", combined.eta_d},
                   {"eta_e", combined.eta_e}, {"eta_f", combined.eta_f}};
  return j.dump();
}

std::vector<std::pair<double, double>> contrast_vs_g2_curve(
    const SourceParams& params, const std::vector<double>& g2_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(g2_grid.size());
  const auto phis = uniform_grid();
  for (double g2 : g2_grid) {
    if (g2 > 0.2) {
      throw std::invalid_argument(
          "g2 beyond 0.2: truncated source model is invalid there");
    }
    if (g2 > 0.1) {
      std::cerr << "warning: g2 = " << g2
                << " stretches the truncated source model\n";
    }
    SourceParams p = params;
    p.g2 = g2;
    const auto report =
        contrast(scan(InputConfig::Ket11, p, DetectionScheme::at_least(1, 1), phis));
    out.emplace_back(g2, report.mean_contrast);
  }
  return out;
}

FitData synthesize_dataset(InputConfig config, const SourceParams& truth,
                           const DetectionScheme& scheme,
                           const std::vector<double>& phis,
                           double counts_per_point, std::uint64_t seed) {
  if (!(counts_per_point > 0.0)) {
    throw std::invalid_argument("counts per point must be positive");
  }
  const FringeScan model = scan(config, truth, scheme, phis);
  const double pmax = *std::max_element(model.probs.begin(), model.probs.end());
  if (!(pmax > 0.0)) {
    throw std::invalid_argument("model fringe is identically zero");
  }
  std::mt19937_64 rng(seed);
  FitData data;
  data.phi = phis;
  data.value.reserve(phis.size());
  data.sigma.reserve(phis.size());
  // counts_per_point sets the Poisson mean at the fringe peak
  for (double p : model.probs) {
    const double mean = counts_per_point * std::max(p, 0.0) / pmax;
    std::poisson_distribution<long long> dist(std::max(mean, 1e-12));
    const double v = static_cast<double>(dist(rng));
    data.value.push_back(v);
    data.sigma.push_back(std::sqrt(std::max(v, 1.0)));
  }
  return data;
}

}  // namespace fringelab
