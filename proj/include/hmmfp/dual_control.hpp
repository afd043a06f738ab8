#pragma once

#include <span>
#include <string>
#include <vector>

#include "hmmfp/oracle.hpp"
#include "hmmfp/predictor_rep.hpp"

namespace hmmfp {

/// Terminal condition F, one d-vector per full path of the horizon.
using TerminalFunction = PathFunction<VectorXd>;

/// Deterministic F repeated on every path of length T.
TerminalFunction constant_terminal(const VectorXd& F, int m, int T);

/**
 * Solution of the dual backward stochastic difference equation
 *
 *   Y_t(x) = (A Y_{t+1})(x) + c(x)^T (U_t + V_t(x)) - V_t(x)^T e(Z_{t+1}),
 *   Y_T = F.
 *
 * V_t is stored as a d x m matrix whose row x is V_t(x)^T.
 */
struct DualTrajectory {
  int horizon = 0;
  AdaptedProcess<VectorXd> Y;  ///< levels 0..T
  AdaptedProcess<MatrixXd> V;  ///< levels 0..T-1
  AdaptedWeightProcess U;      ///< levels 0..T-1
  int rank_deficient_gains = 0;   ///< nodes where rho(R) was singular
  int singular_eliminations = 0;  ///< nodes where the U_t system was singular
};

/**
 * Backward sweep for given U and F. At each prefix and state the successor
 * map z -> (A Y_{t+1})(x) is decomposed into mean + tilde^T e(z); V_t(x) is
 * the tilde part, which makes the random term cancel and leaves Y_t(x)
 * depending on the prefix only.
 */
DualTrajectory solve_bsde(const Model& model, const AdaptedWeightProcess& U,
                          const TerminalFunction& F);

/// One row of the residual diagnostics: max over states and successor tokens.
struct NodeResidual {
  int t = 0;
  std::string prefix;
  double max_residual = 0.0;
};

std::vector<NodeResidual> bsde_residuals(const Model& model, const DualTrajectory& traj);
double max_bsde_residual(const Model& model, const DualTrajectory& traj);

/// l(y, v, u; x) = (Gamma y)(x) + (u + v(x))^T R(x) (u + v(x)).
double running_cost(const Model& model, const VectorXd& y, const MatrixXd& v, const VectorXd& u,
                    State x);

/// J_T = var(Y_0(X_0)) + E sum_t l(Y_{t+1}, V_t, U_t; X_t), by exact enumeration.
double total_cost(const Model& model, const DualTrajectory& traj,
                  std::size_t budget = kDefaultEnumBudget);
double total_cost(const Model& model, const AdaptedWeightProcess& U, const TerminalFunction& F,
                  std::size_t budget = kDefaultEnumBudget);

/// S_t = mu(Y_0) - sum_{s<t} U_s^T e(z_{s+1}) along `z` (length >= t).
double estimator_path(const Model& model, const DualTrajectory& traj, std::span<const Token> z,
                      int t);

/// E |F(X_T) - S_T|^2 by exact enumeration.
double estimator_mse(const Model& model, const DualTrajectory& traj, const TerminalFunction& F,
                     std::size_t budget = kDefaultEnumBudget);

struct DualityReport {
  double J_T = 0.0;
  double mse = 0.0;
  double gap = 0.0;
};

DualityReport duality_gap(const Model& model, const AdaptedWeightProcess& U,
                          const TerminalFunction& F, std::size_t budget = kDefaultEnumBudget);

/**
 * Optimal feedback law
 *
 *   phi(y, v; rho) = -rho(R)^+ ( rho((c - rho(c)) y) + rho(R v) ),
 *
 * with rho(R) = sum_x rho(x) R(x) and rho(R v) = sum_x rho(x) R(x) v(x).
 * The rho(R v) term enters with a plus sign; this is the sign for which the
 * estimator identity pi_t(Y_t) = mu(Y_0) - sum U_s^T e(Z_{s+1}) holds.
 */
VectorXd optimal_feedback(const Model& model, const VectorXd& y, const MatrixXd& v,
                          const VectorXd& rho);

/**
 * Backward sweep with U_t = phi(Y_t, V_t; rho_t) substituted in. Y_t is affine
 * in U_t, so the feedback relation becomes the m x m linear system
 * (I + rho(R)^+ M) U_t = -rho(R)^+ (b + rho(R V_t)), solved directly
 * (pseudo-inverse when singular, counted in the trajectory diagnostics).
 * `rho` must cover levels 0..T-1 of the horizon of F; level 0 is normally mu.
 */
DualTrajectory solve_optimal(const Model& model, const AdaptedProcess<VectorXd>& rho,
                             const TerminalFunction& F);

/// S_t on every prefix, levels 0..T, accumulated down the prefix tree.
AdaptedProcess<double> estimator_process(const Model& model, const DualTrajectory& traj);

}  // namespace hmmfp
