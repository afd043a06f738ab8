#pragma once

#include <span>
#include <vector>

#include "hmmfp/dual_control.hpp"

namespace hmmfp {

/// rho_1 ... rho_T along one observation path (entry t-1 holds rho_t).
using MeasurePath = std::vector<VectorXd>;

/// Measures produced by the maps below are in the domain when every entry
/// is >= -kDomainTolerance and the total is 1 within kDomainTolerance.
inline constexpr double kDomainTolerance = 1e-10;

/// Denominators with |1 - nu(c)^2| at or below this take the zero branch.
inline constexpr double kDegenerateFeedback = 1e-12;

bool is_probability(const VectorXd& v, double tol = kDomainTolerance);

/// Total variation 0.5 * ||a - b||_1.
double total_variation(const VectorXd& a, const VectorXd& b);

MeasurePath uniform_measure_path(int d, int T);

/// Clip negative entries to 0 and renormalize (uniform if nothing is left).
VectorXd project_to_simplex(const VectorXd& v);

/// phi(f; nu, c) = -nu((A f)(c - nu(c))) / (1 - nu(c)^2), or 0 when the
/// denominator vanishes.
double scalar_feedback(const Model& model, const VectorXd& f, const VectorXd& nu,
                       const VectorXd& c);

struct BdeSolution {
  VectorXd y0;
  VectorXd controls;  ///< u_0 ... u_{t-1}
};

/**
 * Backward difference equation for one path, terminal y_t = f:
 *   y_s = A y_{s+1} + c_{s+1} u_s,
 *   u_s = phi(y_{s+1}; rho_s, c_{s+1}) for s >= 1 and phi(y_1; mu, c_1) for s = 0,
 * with c_s = 2 C(., z_s) - 1.
 */
BdeSolution bde_solve(const Model& model, const MeasurePath& rho, std::span<const Token> z, int t,
                      const VectorXd& f);

struct PathMapResult {
  MeasurePath measures;        ///< (N rho)_t, t = 1..T
  std::vector<bool> in_domain; ///< per t
  bool all_in_domain = true;
};

/// (N rho)_t(j) = mu(y_0) - sum_{s<t} u_s with terminal f = 1_{x=j}.
PathMapResult apply_N_path(const Model& model, const MeasurePath& rho, std::span<const Token> z);

struct AdaptedMapResult {
  AdaptedProcess<VectorXd> measures;  ///< levels 1..T
  AdaptedProcess<char> in_domain;     ///< levels 1..T
  bool all_in_domain = true;
  int rank_deficient_gains = 0;
  int singular_eliminations = 0;
};

/**
 * Adapted version: for each t and basis terminal 1_{x=j} at time t, the dual
 * system is solved with feedback U_s = phi(Y_s, V_s; rho_s) and
 * (N rho)_t(j) = mu(Y_0) - sum_{s<t} U_s^T e(z_{s+1}) on every prefix.
 * `rho` covers levels 0..T; level 0 plays the role of rho_0 and should be mu.
 */
AdaptedMapResult apply_N_adapted(const Model& model, const AdaptedProcess<VectorXd>& rho);

/// max_t TV(rho_t, (N rho)_t) along one path.
double path_residual(const Model& model, const MeasurePath& rho, std::span<const Token> z);

/// max over t = 1..T and prefixes of positive probability of TV(rho_t, (N rho)_t).
double adapted_residual(const Model& model, const AdaptedProcess<VectorXd>& rho);

/// Oracle filter along z as a measure path.
MeasurePath filter_measure_path(const Model& model, std::span<const Token> z);

/**
 * Time-averaged KL divergence
 *   (1/T) sum_t sum_z p_final(z,t) ln(p_final(z,t) / p_layer(z,t)),
 * columns indexed by t. Returns +infinity when p_layer misses support of p_final.
 */
double kl_divergence_bar(const MatrixXd& p_final, const MatrixXd& p_layer);

/// Next-token probabilities (m+1) x T of a measure path.
MatrixXd predicted_tokens(const Model& model, const MeasurePath& rho);

struct IterationTrace {
  std::vector<MeasurePath> iterates;  ///< K+1 entries, iterates[0] = rho0
  std::vector<double> residuals;      ///< TV residual of iterate k
  std::vector<double> kl_per_iter;    ///< D-bar(oracle p, p of iterate k+1)
  std::vector<bool> in_domain;        ///< raw image of iterate k was in the domain
  std::vector<std::vector<double>> residual_by_t;
  std::vector<std::vector<bool>> in_domain_by_t;
  int projections = 0;                ///< number of clip-and-renormalize events
};

/// K applications of apply_N_path from rho0. Out-of-domain images are
/// projected back to probability vectors and counted. No convergence is
/// claimed or checked.
IterationTrace iterate(const Model& model, std::span<const Token> z, const MeasurePath& rho0, int K);

}  // namespace hmmfp
