#include "hmmfp/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmmfp {

bool is_probability(const VectorXd& v, double tol) {
  if (!v.allFinite()) return false;
  if (v.minCoeff() < -tol) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

double total_variation(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) throw DomainError("total_variation: size mismatch");
  return 0.5 * (a - b).cwiseAbs().sum();
}

MeasurePath uniform_measure_path(int d, int T) {
  return MeasurePath(static_cast<std::size_t>(T), VectorXd::Constant(d, 1.0 / d));
}

VectorXd project_to_simplex(const VectorXd& v) {
  VectorXd p = v.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!std::isfinite(p(i))) p(i) = 0.0;
  const double total = p.sum();
  if (!(total > 0.0)) return VectorXd::Constant(v.size(), 1.0 / static_cast<double>(v.size()));
  return p / total;
}

double scalar_feedback(const Model& model, const VectorXd& f, const VectorXd& nu,
                       const VectorXd& c) {
  if (f.size() != model.d() || nu.size() != model.d() || c.size() != model.d())
    throw DomainError("scalar_feedback: shape mismatch");
  const double nu_c = nu.dot(c);
  const double denom = 1.0 - nu_c * nu_c;
  if (std::abs(denom) <= kDegenerateFeedback) return 0.0;
  const VectorXd Af = model.A() * f;
  return -nu.dot(Af.cwiseProduct((c.array() - nu_c).matrix())) / denom;
}

BdeSolution bde_solve(const Model& model, const MeasurePath& rho, std::span<const Token> z, int t,
                      const VectorXd& f) {
  if (t < 1 || t > static_cast<int>(z.size())) throw DomainError("bde_solve: t outside 1..T");
  if (static_cast<int>(rho.size()) < t - 1) throw DomainError("bde_solve: rho too short");
  if (f.size() != model.d()) throw DomainError("bde_solve: f must have length d");
  BdeSolution out;
  out.controls = VectorXd::Zero(t);
  VectorXd y = f;
  for (int s = t - 1; s >= 0; --s) {
    const VectorXd c = scalar_obs(model, z[static_cast<std::size_t>(s)]);
    const VectorXd& nu = s == 0 ? model.mu() : rho[static_cast<std::size_t>(s - 1)];
    const double u = scalar_feedback(model, y, nu, c);
    y = model.A() * y + c * u;
    out.controls(s) = u;
  }
  out.y0 = std::move(y);
  return out;
}

PathMapResult apply_N_path(const Model& model, const MeasurePath& rho, std::span<const Token> z) {
  const int T = static_cast<int>(z.size());
  if (static_cast<int>(rho.size()) != T) throw DomainError("apply_N_path: rho and z lengths differ");
  for (const VectorXd& r : rho)
    if (r.size() != model.d()) throw DomainError("apply_N_path: rho entries must have length d");
  PathMapResult out;
  out.measures.assign(static_cast<std::size_t>(T), VectorXd::Zero(model.d()));
  out.in_domain.assign(static_cast<std::size_t>(T), true);
  for (int t = 1; t <= T; ++t) {
    VectorXd& next = out.measures[static_cast<std::size_t>(t - 1)];
    for (State j = 0; j < model.d(); ++j) {
      const BdeSolution sol = bde_solve(model, rho, z, t, VectorXd::Unit(model.d(), j));
      next(j) = model.mu().dot(sol.y0) - sol.controls.sum();
    }
    const bool ok = is_probability(next);
    out.in_domain[static_cast<std::size_t>(t - 1)] = ok;
    out.all_in_domain = out.all_in_domain && ok;
  }
  return out;
}

AdaptedMapResult apply_N_adapted(const Model& model, const AdaptedProcess<VectorXd>& rho) {
  if (rho.empty() || rho.base() != model.tokens() || rho.first_level() != 0 || rho.last_level() < 1)
    throw DomainError("apply_N_adapted: rho must cover levels 0..T with T >= 1");
  const int T = rho.last_level();
  const int base = model.tokens();
  AdaptedMapResult out;
  out.measures = AdaptedProcess<VectorXd>(base, 1, T, VectorXd::Zero(model.d()));
  out.in_domain = AdaptedProcess<char>(base, 1, T, 1);
  for (int t = 1; t <= T; ++t) {
    for (State j = 0; j < model.d(); ++j) {
      const TerminalFunction F = constant_terminal(VectorXd::Unit(model.d(), j), model.m(), t);
      const DualTrajectory traj = solve_optimal(model, rho, F);
      out.rank_deficient_gains += traj.rank_deficient_gains;
      out.singular_eliminations += traj.singular_eliminations;
      const AdaptedProcess<double> S = estimator_process(model, traj);
      for (std::size_t i = 0; i < S.size(t); ++i) out.measures.at(t, i)(j) = S.at(t, i);
    }
    for (std::size_t i = 0; i < out.measures.size(t); ++i) {
      const bool ok = is_probability(out.measures.at(t, i));
      out.in_domain.at(t, i) = ok ? 1 : 0;
      out.all_in_domain = out.all_in_domain && ok;
    }
  }
  return out;
}

double path_residual(const Model& model, const MeasurePath& rho, std::span<const Token> z) {
  const PathMapResult image = apply_N_path(model, rho, z);
  double worst = 0.0;
  for (std::size_t t = 0; t < rho.size(); ++t)
    worst = std::max(worst, total_variation(rho[t], image.measures[t]));
  return worst;
}

double adapted_residual(const Model& model, const AdaptedProcess<VectorXd>& rho) {
  const AdaptedMapResult image = apply_N_adapted(model, rho);
  const int T = rho.last_level();
  const FilterProcess reach = filter_process(model, T);
  double worst = 0.0;
  for (int t = 1; t <= T; ++t)
    for (std::size_t i = 0; i < rho.size(t); ++i)
      if (reach.possible(t, i))
        worst = std::max(worst, total_variation(rho.at(t, i), image.measures.at(t, i)));
  return worst;
}

MeasurePath filter_measure_path(const Model& model, std::span<const Token> z) {
  return forward_filter(model, z).pis;
}

double kl_divergence_bar(const MatrixXd& p_final, const MatrixXd& p_layer) {
  if (p_final.rows() != p_layer.rows() || p_final.cols() != p_layer.cols())
    throw DomainError("kl_divergence_bar: shape mismatch");
  if (p_final.cols() == 0) throw DomainError("kl_divergence_bar: empty horizon");
  // Terms p ln(p/q) - p + q, each clipped at 0; the -p + q parts cancel over a column.
  double total = 0.0;
  for (Eigen::Index t = 0; t < p_final.cols(); ++t) {
    for (Eigen::Index z = 0; z < p_final.rows(); ++z) {
      const double p = p_final(z, t);
      const double q = p_layer(z, t);
      if (p <= 0.0) {
        total += std::max(q, 0.0);
        continue;
      }
      if (q <= 0.0) return std::numeric_limits<double>::infinity();
      total += std::max(p * std::log(p / q) - p + q, 0.0);
    }
  }
  return total / static_cast<double>(p_final.cols());
}

MatrixXd predicted_tokens(const Model& model, const MeasurePath& rho) {
  MatrixXd p(model.tokens(), static_cast<Eigen::Index>(rho.size()));
  for (std::size_t t = 0; t < rho.size(); ++t)
    p.col(static_cast<Eigen::Index>(t)) = next_token_prob(model, rho[t]);
  return p;
}

IterationTrace iterate(const Model& model, std::span<const Token> z, const MeasurePath& rho0, int K) {
  if (K < 1) throw DomainError("iterate: K must be >= 1");
  const MatrixXd p_oracle = predicted_tokens(model, filter_measure_path(model, z));
  IterationTrace trace;
  trace.iterates.push_back(rho0);
  for (int k = 0; k < K; ++k) {
    const MeasurePath& current = trace.iterates.back();
    PathMapResult image = apply_N_path(model, current, z);
    std::vector<double> by_t(current.size());
    for (std::size_t t = 0; t < current.size(); ++t)
      by_t[t] = total_variation(current[t], image.measures[t]);
    const double residual = by_t.empty() ? 0.0 : *std::max_element(by_t.begin(), by_t.end());
    MeasurePath next = std::move(image.measures);
    for (std::size_t t = 0; t < next.size(); ++t) {
      if (!image.in_domain[t]) {
        next[t] = project_to_simplex(next[t]);
        ++trace.projections;
      }
    }
    trace.residuals.push_back(residual);
    trace.residual_by_t.push_back(std::move(by_t));
    trace.in_domain_by_t.push_back(image.in_domain);
    trace.in_domain.push_back(image.all_in_domain);
    trace.kl_per_iter.push_back(kl_divergence_bar(p_oracle, predicted_tokens(model, next)));
    trace.iterates.push_back(std::move(next));
  }
  return trace;
}

}  // namespace hmmfp
