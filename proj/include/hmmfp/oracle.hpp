#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hmmfp/hmm_core.hpp"

namespace hmmfp {

inline constexpr std::size_t kDefaultEnumBudget = 10'000'000;

/// pi_1 ... pi_T for one observation path; `at(t)` is 1-indexed.
struct FilterTrajectory {
  std::vector<VectorXd> pis;

  int horizon() const { return static_cast<int>(pis.size()); }
  const VectorXd& at(int t) const { return pis.at(static_cast<std::size_t>(t - 1)); }
};

/**
 * Exact filter pi_t(x) = P(X_t = x | Z_{1:t} = z_{1:t}).
 *
 * Each step reweights the posterior on X_{t-1} by C(., z_t), normalizes, and
 * pushes the result through A, because Z_t is emitted by X_{t-1}. Under
 * kZeroConvention an impossible prefix yields the zero vector from that time
 * on; under kRaise it throws ImpossibleObservation naming the time.
 */
FilterTrajectory forward_filter(const Model& model, std::span<const Token> z,
                                ZeroPolicy policy = ZeroPolicy::kRaise);

/// p(z) = sum_x pi(x) C(x, z).
VectorXd next_token_prob(const Model& model, const VectorXd& pi);

/// P(Z_{1:T} = z) by the forward (sum-product) recursion.
double path_probability(const Model& model, std::span<const Token> z);

/// P(Z_{1:T} = z) by summing over every hidden path x_{0:T-1}.
double path_probability_enumerated(const Model& model, std::span<const Token> z);

/// P(X_t = . | Z_{1:t} = z) by Bayes' rule over every hidden path.
VectorXd conditional_by_enumeration(const Model& model, std::span<const Token> z);

/// P(Z_{t+1} = . | Z_{1:t} = z) by Bayes' rule over every hidden path.
VectorXd next_token_by_enumeration(const Model& model, std::span<const Token> z);

/// Number of terms the exact evaluator is allowed to budget for a horizon.
std::size_t enumeration_terms(const Model& model, int T);

using PathFunctional = std::function<double(std::span<const State> x, std::span<const Token> z)>;

/**
 * E[h(X_{0:T}, Z_{1:T})] as an exact sum over every joint path with nonzero
 * probability, in a fixed lexicographic order. Throws BudgetExceeded when
 * d^(T+1) (m+1)^(T+1) exceeds `budget`.
 */
double exact_expectation(const Model& model, int T, const PathFunctional& h,
                         std::size_t budget = kDefaultEnumBudget);

/// The filter on every prefix of length 0..T, with the prefix probabilities.
struct FilterProcess {
  AdaptedProcess<VectorXd> pi;  ///< level 0 holds mu
  AdaptedProcess<double> prob;  ///< P(Z_{1:t} = prefix)

  bool possible(int t, std::size_t index) const { return prob.at(t, index) > 0.0; }
};

/// Prefixes of probability zero carry their parent's measure pushed through
/// A (no conditioning); callers should consult `prob` before trusting them.
FilterProcess filter_process(const Model& model, int T);

}  // namespace hmmfp
