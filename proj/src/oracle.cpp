#include "hmmfp/oracle.hpp"

#include <limits>
#include <string>

namespace hmmfp {

namespace {

void check_tokens(const Model& model, std::span<const Token> z) {
  for (Token t : z) model.check_token(t);
}

// Calls visit(x_path, weight) for every hidden path x_0..x_t of nonzero prior
// weight mu(x_0) prod A * prod C(x_{s-1}, z_s).
template <typename Visit>
void for_each_hidden_path(const Model& model, std::span<const Token> z, Visit&& visit) {
  const int t = static_cast<int>(z.size());
  std::vector<State> x(static_cast<std::size_t>(t + 1));
  auto recurse = [&](auto&& self, int s, double w) -> void {
    if (w == 0.0) return;
    if (s == t) {
      visit(std::span<const State>(x), w);
      return;
    }
    const State from = x[static_cast<std::size_t>(s)];
    const double emit = model.C()(from, z[static_cast<std::size_t>(s)]);
    for (State y = 0; y < model.d(); ++y) {
      x[static_cast<std::size_t>(s + 1)] = y;
      self(self, s + 1, w * emit * model.A()(from, y));
    }
  };
  for (State x0 = 0; x0 < model.d(); ++x0) {
    x[0] = x0;
    recurse(recurse, 0, model.mu()(x0));
  }
}

}  // namespace

FilterTrajectory forward_filter(const Model& model, std::span<const Token> z, ZeroPolicy policy) {
  check_tokens(model, z);
  FilterTrajectory out;
  out.pis.reserve(z.size());
  VectorXd pi = model.mu();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    VectorXd weighted = pi.cwiseProduct(model.C().col(z[i]));
    const double norm = weighted.sum();
    if (!(norm > 0.0)) {
      if (policy == ZeroPolicy::kRaise)
        throw ImpossibleObservation(t, "impossible observation: token " + std::to_string(z[i]) +
                                           " at t=" + std::to_string(t) +
                                           " has zero probability given the prefix");
      pi = VectorXd::Zero(model.d());
    } else {
      pi = (weighted / norm).transpose() * model.A();
    }
    out.pis.push_back(pi);
  }
  return out;
}

VectorXd next_token_prob(const Model& model, const VectorXd& pi) {
  if (pi.size() != model.d()) throw DomainError("next_token_prob: pi must have length d");
  return model.C().transpose() * pi;
}

double path_probability(const Model& model, std::span<const Token> z) {
  check_tokens(model, z);
  // alpha(x) = P(Z_{1:t} = z_{1:t}, X_t = x)
  VectorXd alpha = model.mu();
  for (Token tok : z) alpha = alpha.cwiseProduct(model.C().col(tok)).transpose() * model.A();
  return alpha.sum();
}

double path_probability_enumerated(const Model& model, std::span<const Token> z) {
  check_tokens(model, z);
  double total = 0.0;
  for_each_hidden_path(model, z, [&](std::span<const State>, double w) { total += w; });
  return total;
}

VectorXd conditional_by_enumeration(const Model& model, std::span<const Token> z) {
  check_tokens(model, z);
  VectorXd joint = VectorXd::Zero(model.d());
  for_each_hidden_path(model, z, [&](std::span<const State> x, double w) { joint(x.back()) += w; });
  const double total = joint.sum();
  if (!(total > 0.0))
    throw ImpossibleObservation(static_cast<int>(z.size()), "impossible observation prefix");
  return joint / total;
}

VectorXd next_token_by_enumeration(const Model& model, std::span<const Token> z) {
  check_tokens(model, z);
  VectorXd joint = VectorXd::Zero(model.tokens());
  for_each_hidden_path(model, z, [&](std::span<const State> x, double w) {
    for (Token next = 0; next <= model.m(); ++next) joint(next) += w * model.C()(x.back(), next);
  });
  const double total = joint.sum();
  if (!(total > 0.0))
    throw ImpossibleObservation(static_cast<int>(z.size()), "impossible observation prefix");
  return joint / total;
}

std::size_t enumeration_terms(const Model& model, int T) {
  const auto d = static_cast<std::size_t>(model.d());
  const auto k = static_cast<std::size_t>(model.tokens());
  const std::size_t a = checked_pow(d, T + 1);
  const std::size_t b = checked_pow(k, T + 1);
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a)
    throw BudgetExceeded("enumeration size overflows");
  return a * b;
}

double exact_expectation(const Model& model, int T, const PathFunctional& h, std::size_t budget) {
  if (T < 0) throw DomainError("exact_expectation: negative horizon");
  std::size_t terms = 0;
  try {
    terms = enumeration_terms(model, T);
  } catch (const BudgetExceeded&) {
    terms = std::numeric_limits<std::size_t>::max();
  }
  if (terms > budget)
    throw BudgetExceeded("exact enumeration needs " +
                         (terms == std::numeric_limits<std::size_t>::max() ? std::string("too many")
                                                                            : std::to_string(terms)) +
                         " terms, over the budget of " + std::to_string(budget) +
                         "; use a smaller T, d or m");

  std::vector<State> x(static_cast<std::size_t>(T + 1));
  std::vector<Token> z(static_cast<std::size_t>(T));
  double total = 0.0;
  auto recurse = [&](auto&& self, int s, double w) -> void {
    if (w == 0.0) return;
    if (s == T) {
      total += w * h(std::span<const State>(x), std::span<const Token>(z));
      return;
    }
    const State from = x[static_cast<std::size_t>(s)];
    for (Token tok = 0; tok <= model.m(); ++tok) {
      const double emit = model.C()(from, tok);
      if (emit == 0.0) continue;
      z[static_cast<std::size_t>(s)] = tok;
      for (State y = 0; y < model.d(); ++y) {
        x[static_cast<std::size_t>(s + 1)] = y;
        self(self, s + 1, w * emit * model.A()(from, y));
      }
    }
  };
  for (State x0 = 0; x0 < model.d(); ++x0) {
    x[0] = x0;
    recurse(recurse, 0, model.mu()(x0));
  }
  return total;
}

FilterProcess filter_process(const Model& model, int T) {
  if (T < 0) throw DomainError("filter_process: negative horizon");
  const int base = model.tokens();
  FilterProcess out{AdaptedProcess<VectorXd>(base, 0, T), AdaptedProcess<double>(base, 0, T, 0.0)};
  out.pi.at(0, 0) = model.mu();
  out.prob.at(0, 0) = 1.0;
  for (int t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < out.pi.size(t); ++i) {
      const VectorXd& pi = out.pi.at(t, i);
      const double p_prefix = out.prob.at(t, i);
      for (Token tok = 0; tok < base; ++tok) {
        const std::size_t child = i * static_cast<std::size_t>(base) + static_cast<std::size_t>(tok);
        const VectorXd weighted = pi.cwiseProduct(model.C().col(tok));
        const double p_next = weighted.sum();
        if (p_prefix > 0.0 && p_next > 0.0) {
          out.prob.at(t + 1, child) = p_prefix * p_next;
          out.pi.at(t + 1, child) = (weighted / p_next).transpose() * model.A();
        } else {
          out.prob.at(t + 1, child) = 0.0;
          out.pi.at(t + 1, child) = pi.transpose() * model.A();
        }
      }
    }
  }
  return out;
}

}  // namespace hmmfp
