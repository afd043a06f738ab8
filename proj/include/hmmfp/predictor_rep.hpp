#pragma once

#include <span>
#include <string>

#include "hmmfp/oracle.hpp"

namespace hmmfp {

/// Weight process U_t, one m-vector per prefix of length t in [0, T-1].
using AdaptedWeightProcess = AdaptedProcess<VectorXd>;

/// S(z_{1:T}) = constant - sum_t U_t(z_{1:t})^T e(z_{t+1}).
struct PredictorRepresentation {
  int m = 1;
  int T = 1;
  double constant = 0.0;
  AdaptedWeightProcess weights;
};

/**
 * Backward induction: at every prefix z_{1:t-1}, decompose the map
 * z -> S_t(z_{1:t-1}, z), keep the mean as S_{t-1} and store U_{t-1} = -tilde.
 * `target` is the level-T function (one value per full path).
 */
PredictorRepresentation build_weights(const PathFunction<double>& target);

/// Dense target on all paths of length T from a callable.
template <typename F>
PathFunction<double> tabulate_paths(int m, int T, F&& f) {
  PathFunction<double> out(m + 1, T, T, 0.0);
  for (std::size_t i = 0; i < out.size(T); ++i) {
    const auto z = prefix_tokens(i, m + 1, T);
    out.at(T, i) = f(std::span<const Token>(z));
  }
  return out;
}

/// Conditional next-token probability P(Z_{T+1} = z_query | Z_{1:T} = .) on every path.
PathFunction<double> conditional_target(const Model& model, Token z_query,
                                        ZeroPolicy policy = ZeroPolicy::kRaise);

/// Representation of P(Z_{T+1} = z_query | Z_{1:T}) for the model horizon T.
PredictorRepresentation represent_conditional(const Model& model, Token z_query,
                                              ZeroPolicy policy = ZeroPolicy::kRaise);

double evaluate(const PredictorRepresentation& rep, std::span<const Token> z);

/// JSON with `constant` and `weights` as [prefix, vector] pairs; prefixes are
/// token digits joined by '.'.
std::string representation_to_json(const PredictorRepresentation& rep);

}  // namespace hmmfp
