#include "hmmfp/attention.hpp"

namespace hmmfp {

namespace {

MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd M(rows, cols);
  // Column-major fill order keeps draws reproducible across builds.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = scale * normal(rng);
  return M;
}

}  // namespace

LayerParams<double> random_layer_params(int d, int n_head, std::mt19937_64& rng,
                                        Activation activation) {
  if (d < 1 || n_head < 1 || d % n_head != 0)
    throw DomainError("random_layer_params: n_head must divide d");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const int d_v = d / n_head;
  LayerParams<double> p;
  for (int h = 0; h < n_head; ++h)
    p.heads.push_back({gaussian(d_v, d, scale, rng), gaussian(d_v, d, scale, rng),
                       gaussian(d_v, d, scale, rng)});
  p.W_O = gaussian(d, d, scale, rng);
  p.norm1 = {VectorXd::Ones(d) + gaussian(d, 1, 0.1, rng), gaussian(d, 1, 0.1, rng), 1e-5};
  p.norm2 = {VectorXd::Ones(d) + gaussian(d, 1, 0.1, rng), gaussian(d, 1, 0.1, rng), 1e-5};
  const int hidden = 4 * d;
  p.ffn.W1 = gaussian(hidden, d, scale, rng);
  p.ffn.b1 = gaussian(hidden, 1, scale, rng);
  p.ffn.W2 = gaussian(d, hidden, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  p.ffn.b2 = gaussian(d, 1, scale, rng);
  p.ffn.activation = activation;
  return p;
}

MatrixXd random_embedding(int d, int m, std::mt19937_64& rng) {
  return gaussian(d, m + 1, 1.0 / std::sqrt(static_cast<double>(d)), rng);
}

}  // namespace hmmfp
