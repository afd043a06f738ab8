#include "hmmfp/dual_control.hpp"

#include <algorithm>
#include <cmath>

#include "hmmfp/linalg.hpp"

namespace hmmfp {

namespace {

struct ModelTables {
  MatrixXd c;                  // d x m, row x = c(x)^T
  std::vector<MatrixXd> risk;  // R(x)
  std::vector<VectorXd> embed; // e(z)

  explicit ModelTables(const Model& model) : c(obs_matrix(model)) {
    for (State x = 0; x < model.d(); ++x) risk.push_back(risk_matrix(model, x));
    for (Token z = 0; z <= model.m(); ++z) embed.push_back(embed_token(model.m(), z));
  }
};

int horizon_of(const TerminalFunction& F) {
  if (F.empty() || F.first_level() != F.last_level())
    throw DomainError("terminal function must be a single level of full paths");
  return F.last_level();
}

void check_terminal(const Model& model, const TerminalFunction& F) {
  if (F.base() != model.tokens()) throw DomainError("terminal function alphabet mismatch");
  const int T = horizon_of(F);
  if (T < 1) throw DomainError("horizon must be >= 1");
  for (const VectorXd& f : F.level(T))
    if (f.size() != model.d()) throw DomainError("terminal function is incomplete");
}

// Successor decomposition at one node: mean(x) and V(x) for every state.
struct SuccessorSplit {
  VectorXd mean;  // d
  MatrixXd V;     // d x m
};

SuccessorSplit split_successors(const Model& model, const std::vector<VectorXd>& next_level,
                                std::size_t node) {
  const int base = model.tokens();
  MatrixXd AY(base, model.d());
  for (int z = 0; z < base; ++z) {
    const VectorXd& y = next_level.at(node * static_cast<std::size_t>(base) + static_cast<std::size_t>(z));
    AY.row(z) = (model.A() * y).transpose();
  }
  SuccessorSplit s;
  s.mean = AY.colwise().mean().transpose();
  s.V = (AY.bottomRows(model.m()).rowwise() - s.mean.transpose()).transpose();
  return s;
}

VectorXd assemble_Y(const ModelTables& tab, const SuccessorSplit& s, const VectorXd& U) {
  VectorXd Y = s.mean + tab.c * U;
  Y += tab.c.cwiseProduct(s.V).rowwise().sum();
  return Y;
}

DualTrajectory make_trajectory(const Model& model, const TerminalFunction& F) {
  const int T = horizon_of(F);
  const int base = model.tokens();
  DualTrajectory traj;
  traj.horizon = T;
  traj.Y = AdaptedProcess<VectorXd>(base, 0, T);
  traj.V = AdaptedProcess<MatrixXd>(base, 0, T - 1);
  traj.U = AdaptedWeightProcess(base, 0, T - 1);
  traj.Y.level(T) = F.level(T);
  return traj;
}

}  // namespace

TerminalFunction constant_terminal(const VectorXd& F, int m, int T) {
  return TerminalFunction(m + 1, T, T, F);
}

DualTrajectory solve_bsde(const Model& model, const AdaptedWeightProcess& U,
                          const TerminalFunction& F) {
  check_terminal(model, F);
  const int T = horizon_of(F);
  if (U.empty() || U.base() != model.tokens() || U.first_level() != 0 || U.last_level() < T - 1)
    throw DomainError("solve_bsde: control must cover levels 0..T-1");
  const ModelTables tab(model);
  DualTrajectory traj = make_trajectory(model, F);
  for (int t = T - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < traj.Y.size(t); ++i) {
      const VectorXd& u = U.at(t, i);
      if (u.size() != model.m()) throw DomainError("solve_bsde: control is incomplete");
      const SuccessorSplit s = split_successors(model, traj.Y.level(t + 1), i);
      traj.Y.at(t, i) = assemble_Y(tab, s, u);
      traj.V.at(t, i) = s.V;
      traj.U.at(t, i) = u;
    }
  }
  return traj;
}

std::vector<NodeResidual> bsde_residuals(const Model& model, const DualTrajectory& traj) {
  const ModelTables tab(model);
  const int base = model.tokens();
  std::vector<NodeResidual> out;
  for (int t = 0; t < traj.horizon; ++t) {
    for (std::size_t i = 0; i < traj.Y.size(t); ++i) {
      const VectorXd& Y = traj.Y.at(t, i);
      const MatrixXd& V = traj.V.at(t, i);
      const VectorXd& U = traj.U.at(t, i);
      double worst = 0.0;
      for (int z = 0; z < base; ++z) {
        const VectorXd AY = model.A() * traj.Y.at(t + 1, i * static_cast<std::size_t>(base) +
                                                              static_cast<std::size_t>(z));
        for (State x = 0; x < model.d(); ++x) {
          const VectorXd w = U + V.row(x).transpose();
          const double rhs = AY(x) + tab.c.row(x).dot(w) - V.row(x).dot(tab.embed[static_cast<std::size_t>(z)]);
          worst = std::max(worst, std::abs(Y(x) - rhs));
        }
      }
      const auto prefix = prefix_tokens(i, base, t);
      out.push_back({t, prefix_string(prefix), worst});
    }
  }
  return out;
}

double max_bsde_residual(const Model& model, const DualTrajectory& traj) {
  double worst = 0.0;
  for (const auto& r : bsde_residuals(model, traj)) worst = std::max(worst, r.max_residual);
  return worst;
}

double running_cost(const Model& model, const VectorXd& y, const MatrixXd& v, const VectorXd& u,
                    State x) {
  model.check_state(x);
  if (y.size() != model.d() || v.rows() != model.d() || v.cols() != model.m() ||
      u.size() != model.m())
    throw DomainError("running_cost: shape mismatch");
  const VectorXd w = u + v.row(x).transpose();
  return gamma_op(model, y)(x) + w.dot(risk_matrix(model, x) * w);
}

double total_cost(const Model& model, const DualTrajectory& traj, std::size_t budget) {
  const int T = traj.horizon;
  const int base = model.tokens();
  if (traj.Y.size(0) != 1) throw std::logic_error("Y_0 must be deterministic");
  const VectorXd& Y0 = traj.Y.at(0, 0);
  const double mean = model.mu().dot(Y0);
  const double var = model.mu().dot(Y0.cwiseProduct(Y0)) - mean * mean;

  // cost[t][child][x] = l(Y_{t+1}(child), V_t(parent), U_t(parent); x)
  std::vector<std::vector<VectorXd>> cost(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    auto& level = cost[static_cast<std::size_t>(t)];
    level.resize(traj.Y.size(t + 1));
    for (std::size_t child = 0; child < level.size(); ++child) {
      const std::size_t parent = child / static_cast<std::size_t>(base);
      VectorXd l(model.d());
      for (State x = 0; x < model.d(); ++x)
        l(x) = running_cost(model, traj.Y.at(t + 1, child), traj.V.at(t, parent),
                            traj.U.at(t, parent), x);
      level[child] = std::move(l);
    }
  }
  const double expected = exact_expectation(
      model, T,
      [&](std::span<const State> x, std::span<const Token> z) {
        double sum = 0.0;
        std::size_t idx = 0;
        for (int t = 0; t < T; ++t) {
          idx = idx * static_cast<std::size_t>(base) + static_cast<std::size_t>(z[static_cast<std::size_t>(t)]);
          sum += cost[static_cast<std::size_t>(t)][idx](x[static_cast<std::size_t>(t)]);
        }
        return sum;
      },
      budget);
  return var + expected;
}

double total_cost(const Model& model, const AdaptedWeightProcess& U, const TerminalFunction& F,
                  std::size_t budget) {
  return total_cost(model, solve_bsde(model, U, F), budget);
}

double estimator_path(const Model& model, const DualTrajectory& traj, std::span<const Token> z,
                      int t) {
  if (t < 0 || t > traj.horizon || static_cast<int>(z.size()) < t)
    throw DomainError("estimator_path: time outside the path");
  double S = model.mu().dot(traj.Y.at(0, 0));
  for (int s = 0; s < t; ++s)
    S -= traj.U.at(z.first(static_cast<std::size_t>(s)))
             .dot(embed_token(model.m(), z[static_cast<std::size_t>(s)]));
  return S;
}

double estimator_mse(const Model& model, const DualTrajectory& traj, const TerminalFunction& F,
                     std::size_t budget) {
  const int T = traj.horizon;
  const int base = model.tokens();
  // S_T per full path, tabulated once.
  std::vector<double> S(traj.Y.size(T));
  for (std::size_t i = 0; i < S.size(); ++i) {
    const auto z = prefix_tokens(i, base, T);
    S[i] = estimator_path(model, traj, z, T);
  }
  return exact_expectation(
      model, T,
      [&](std::span<const State> x, std::span<const Token> z) {
        const std::size_t idx = prefix_index(z, base);
        const double err = F.at(T, idx)(x.back()) - S[idx];
        return err * err;
      },
      budget);
}

DualityReport duality_gap(const Model& model, const AdaptedWeightProcess& U,
                          const TerminalFunction& F, std::size_t budget) {
  const DualTrajectory traj = solve_bsde(model, U, F);
  DualityReport r;
  r.J_T = total_cost(model, traj, budget);
  r.mse = estimator_mse(model, traj, F, budget);
  r.gap = std::abs(r.J_T - r.mse);
  return r;
}

VectorXd optimal_feedback(const Model& model, const VectorXd& y, const MatrixXd& v,
                          const VectorXd& rho) {
  if (y.size() != model.d() || rho.size() != model.d() || v.rows() != model.d() ||
      v.cols() != model.m())
    throw DomainError("optimal_feedback: shape mismatch");
  const ModelTables tab(model);
  const int m = model.m();
  const VectorXd c_bar = tab.c.transpose() * rho;
  MatrixXd rho_R = MatrixXd::Zero(m, m);
  VectorXd centered = VectorXd::Zero(m);
  VectorXd rho_Rv = VectorXd::Zero(m);
  for (State x = 0; x < model.d(); ++x) {
    const auto& R = tab.risk[static_cast<std::size_t>(x)];
    rho_R += rho(x) * R;
    centered += rho(x) * (tab.c.row(x).transpose() - c_bar) * y(x);
    rho_Rv += rho(x) * (R * v.row(x).transpose());
  }
  return -pseudo_inverse(rho_R).matrix * (centered + rho_Rv);
}

DualTrajectory solve_optimal(const Model& model, const AdaptedProcess<VectorXd>& rho,
                             const TerminalFunction& F) {
  check_terminal(model, F);
  const int T = horizon_of(F);
  if (rho.empty() || rho.base() != model.tokens() || rho.first_level() != 0 ||
      rho.last_level() < T - 1)
    throw DomainError("solve_optimal: rho must cover levels 0..T-1");
  const ModelTables tab(model);
  const int m = model.m();
  const MatrixXd I = MatrixXd::Identity(m, m);
  DualTrajectory traj = make_trajectory(model, F);

  for (int t = T - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < traj.Y.size(t); ++i) {
      const VectorXd& r = rho.at(t, i);
      if (r.size() != model.d()) throw DomainError("solve_optimal: rho is incomplete");
      const SuccessorSplit s = split_successors(model, traj.Y.level(t + 1), i);
      const VectorXd c_bar = tab.c.transpose() * r;

      // Y_t(x) = mean(x) + c(x)^T V(x) + c(x)^T U, so
      // rho((c - rho(c)) Y_t) = b + M U.
      MatrixXd rho_R = MatrixXd::Zero(m, m);
      MatrixXd M = MatrixXd::Zero(m, m);
      VectorXd b = VectorXd::Zero(m);
      VectorXd rho_RV = VectorXd::Zero(m);
      for (State x = 0; x < model.d(); ++x) {
        const VectorXd cx = tab.c.row(x).transpose();
        const VectorXd vx = s.V.row(x).transpose();
        const auto& R = tab.risk[static_cast<std::size_t>(x)];
        rho_R += r(x) * R;
        M += r(x) * (cx - c_bar) * cx.transpose();
        b += r(x) * (cx - c_bar) * (s.mean(x) + cx.dot(vx));
        rho_RV += r(x) * (R * vx);
      }
      const auto gain = pseudo_inverse(rho_R);
      if (!gain.full_rank) ++traj.rank_deficient_gains;
      const MatrixXd K = I + gain.matrix * M;
      const VectorXd rhs = -gain.matrix * (b + rho_RV);
      const auto K_inv = pseudo_inverse(K);
      if (!K_inv.full_rank) ++traj.singular_eliminations;
      const VectorXd U = K_inv.matrix * rhs;

      traj.Y.at(t, i) = assemble_Y(tab, s, U);
      traj.V.at(t, i) = s.V;
      traj.U.at(t, i) = U;
    }
  }
  return traj;
}

AdaptedProcess<double> estimator_process(const Model& model, const DualTrajectory& traj) {
  const int base = model.tokens();
  AdaptedProcess<double> S(base, 0, traj.horizon, 0.0);
  S.at(0, 0) = model.mu().dot(traj.Y.at(0, 0));
  for (int t = 0; t < traj.horizon; ++t) {
    for (std::size_t i = 0; i < S.size(t); ++i) {
      for (Token z = 0; z < base; ++z) {
        const std::size_t child = i * static_cast<std::size_t>(base) + static_cast<std::size_t>(z);
        S.at(t + 1, child) = S.at(t, i) - traj.U.at(t, i).dot(embed_token(model.m(), z));
      }
    }
  }
  return S;
}

}  // namespace hmmfp
