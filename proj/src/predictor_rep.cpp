#include "hmmfp/predictor_rep.hpp"

#include <json.hpp>

namespace hmmfp {

PredictorRepresentation build_weights(const PathFunction<double>& target) {
  if (target.empty() || target.first_level() != target.last_level())
    throw DomainError("build_weights: target must be a single level of full paths");
  const int base = target.base();
  const int T = target.last_level();
  if (T < 1) throw DomainError("build_weights: horizon must be >= 1");
  const int m = base - 1;
  if (target.size(T) != prefix_count(base, T))
    throw DomainError("build_weights: target is incomplete");

  PredictorRepresentation rep;
  rep.m = m;
  rep.T = T;
  rep.weights = AdaptedWeightProcess(base, 0, T - 1, VectorXd::Zero(m));

  std::vector<double> level = target.level(T);
  VectorXd successors(base);
  for (int t = T; t >= 1; --t) {
    std::vector<double> parent(prefix_count(base, t - 1));
    for (std::size_t i = 0; i < parent.size(); ++i) {
      for (int z = 0; z < base; ++z)
        successors(z) = level[i * static_cast<std::size_t>(base) + static_cast<std::size_t>(z)];
      const auto dec = decompose(successors);
      parent[i] = dec.mean;
      rep.weights.at(t - 1, i) = -dec.tilde;
    }
    level = std::move(parent);
  }
  rep.constant = level.front();
  return rep;
}

PathFunction<double> conditional_target(const Model& model, Token z_query, ZeroPolicy policy) {
  model.check_token(z_query);
  return tabulate_paths(model.m(), model.T(), [&](std::span<const Token> z) {
    const FilterTrajectory traj = forward_filter(model, z, policy);
    const VectorXd& pi = traj.at(traj.horizon());
    // Under the zero convention pi is identically zero on impossible paths.
    return next_token_prob(model, pi)(z_query);
  });
}

PredictorRepresentation represent_conditional(const Model& model, Token z_query, ZeroPolicy policy) {
  return build_weights(conditional_target(model, z_query, policy));
}

double evaluate(const PredictorRepresentation& rep, std::span<const Token> z) {
  if (static_cast<int>(z.size()) != rep.T)
    throw DomainError("evaluate: path length " + std::to_string(z.size()) + " != horizon " +
                      std::to_string(rep.T));
  double value = rep.constant;
  for (int t = 0; t < rep.T; ++t) {
    const VectorXd& U = rep.weights.at(z.first(static_cast<std::size_t>(t)));
    value -= U.dot(embed_token(rep.m, z[static_cast<std::size_t>(t)]));
  }
  return value;
}

std::string representation_to_json(const PredictorRepresentation& rep) {
  nlohmann::json j;
  j["m"] = rep.m;
  j["T"] = rep.T;
  j["constant"] = rep.constant;
  j["weights"] = nlohmann::json::array();
  for (int t = 0; t < rep.T; ++t) {
    for (std::size_t i = 0; i < rep.weights.size(t); ++i) {
      const auto prefix = prefix_tokens(i, rep.m + 1, t);
      const VectorXd& U = rep.weights.at(t, i);
      j["weights"].push_back({prefix_string(prefix), std::vector<double>(U.data(), U.data() + U.size())});
    }
  }
  return j.dump(2);
}

}  // namespace hmmfp
