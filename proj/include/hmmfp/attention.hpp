#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "hmmfp/types.hpp"

namespace hmmfp {

inline constexpr double kDefaultEllMax = 10000.0;

/// Numerically stable softmax (max-subtracted).
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = logits.maxCoeff();
  Vector<Scalar> w = (logits.array() - top).exp().matrix();
  return w / w.sum();
}

/**
 * Sinusoidal positional encoding, d x T with positions t = 1..T:
 * row 2i-1 is sin(ell_max^(-2i/d) t) and row 2i is cos(ell_max^(-2i/d) t),
 * i = 1..d/2 (1-indexed rows).
 */
template <typename Scalar = double>
Matrix<Scalar> positional_encoding(int d, int T, Scalar ell_max = Scalar(kDefaultEllMax)) {
  if (d < 2 || d % 2 != 0) throw DomainError("positional encoding needs an even dimension d");
  if (T < 1) throw DomainError("positional encoding needs T >= 1");
  Matrix<Scalar> W(d, T);
  for (int i = 1; i <= d / 2; ++i) {
    const Scalar freq = std::pow(ell_max, -Scalar(2 * i) / Scalar(d));
    for (int t = 1; t <= T; ++t) {
      W(2 * i - 2, t - 1) = std::sin(freq * Scalar(t));
      W(2 * i - 1, t - 1) = std::cos(freq * Scalar(t));
    }
  }
  return W;
}

/// sigma_t^(0)(x) = C_xfer(x, z_t) + W_p(x, t). `embedding` is d x (m+1).
template <typename Scalar>
Matrix<Scalar> embed_sequence(const Matrix<Scalar>& embedding, const Matrix<Scalar>& pe,
                              std::span<const Token> z) {
  const auto T = static_cast<Eigen::Index>(z.size());
  if (pe.rows() != embedding.rows() || pe.cols() < T)
    throw DomainError("embed_sequence: positional encoding shape mismatch");
  Matrix<Scalar> sigma(embedding.rows(), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Token tok = z[static_cast<std::size_t>(t)];
    if (tok < 0 || tok >= embedding.cols()) throw DomainError("embed_sequence: token out of range");
    sigma.col(t) = embedding.col(tok) + pe.col(t);
  }
  return sigma;
}

/// p(z) = softmax(sigma^T C_xfer)(z).
template <typename Scalar>
Vector<Scalar> unembed(const Matrix<Scalar>& embedding, const Vector<Scalar>& sigma) {
  if (sigma.size() != embedding.rows()) throw DomainError("unembed: dimension mismatch");
  return softmax(embedding.transpose() * sigma);
}

template <typename Scalar>
struct AttentionHead {
  Matrix<Scalar> W_Q;  ///< d_K x d
  Matrix<Scalar> W_K;  ///< d_K x d
  Matrix<Scalar> W_V;  ///< d_V x d
};

/// alpha(s; t) for s = 1..t: softmax of q_t^T k_s / sqrt(d_K). `t` is 1-indexed.
template <typename Scalar>
Vector<Scalar> attention_weights(const AttentionHead<Scalar>& head, const Matrix<Scalar>& sigmas,
                                 int t) {
  if (t < 1 || t > sigmas.cols()) throw DomainError("attention_weights: t outside 1..T");
  const Vector<Scalar> q = head.W_Q * sigmas.col(t - 1);
  const Matrix<Scalar> keys = head.W_K * sigmas.leftCols(t);
  const Scalar scale = std::sqrt(Scalar(head.W_K.rows()));
  return softmax((keys.transpose() * q) / scale);
}

/// o_t = W_V sum_{s<=t} alpha(s; t) sigma_s.
template <typename Scalar>
Vector<Scalar> head_output(const AttentionHead<Scalar>& head, const Matrix<Scalar>& sigmas, int t) {
  const Vector<Scalar> alpha = attention_weights(head, sigmas, t);
  return head.W_V * (sigmas.leftCols(t) * alpha);
}

template <typename Scalar>
struct LayerNormParams {
  Vector<Scalar> gain;
  Vector<Scalar> offset;
  Scalar epsilon = Scalar(1e-5);  ///< added to the variance
};

/// diag(gain) (y - mean) / sqrt(var + epsilon) + offset, population variance.
template <typename Scalar>
Vector<Scalar> layer_norm(const Vector<Scalar>& y, const LayerNormParams<Scalar>& p) {
  const Scalar mean = y.mean();
  const Vector<Scalar> centered = (y.array() - mean).matrix();
  const Scalar var = centered.squaredNorm() / Scalar(y.size());
  const Vector<Scalar> normalized = centered / std::sqrt(var + p.epsilon);
  return p.gain.cwiseProduct(normalized) + p.offset;
}

enum class Activation { kGelu, kSilu };

template <typename Scalar>
Scalar activate(Scalar v, Activation a) {
  switch (a) {
    case Activation::kSilu:
      return v / (Scalar(1) + std::exp(-v));
    case Activation::kGelu:
    default:
      return Scalar(0.5) * v * (Scalar(1) + std::erf(v / std::sqrt(Scalar(2))));
  }
}

/// Two affine maps around a fixed pointwise nonlinearity; hidden width 4d by default.
template <typename Scalar>
struct FeedForward {
  Matrix<Scalar> W1;
  Vector<Scalar> b1;
  Matrix<Scalar> W2;
  Vector<Scalar> b2;
  Activation activation = Activation::kGelu;

  Vector<Scalar> operator()(const Vector<Scalar>& y) const {
    Vector<Scalar> h = W1 * y + b1;
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = activate(h(i), activation);
    return W2 * h + b2;
  }
};

/// Toggles for the operations applied after multi-head attention.
struct MiscOps {
  bool residual = true;
  bool layer_norm = true;
  bool feed_forward = true;

  static MiscOps none() { return {false, false, false}; }
  bool any() const { return residual || layer_norm || feed_forward; }
};

template <typename Scalar>
struct LayerParams {
  std::vector<AttentionHead<Scalar>> heads;
  Matrix<Scalar> W_O;  ///< d x d
  LayerNormParams<Scalar> norm1;
  LayerNormParams<Scalar> norm2;
  FeedForward<Scalar> ffn;
  MiscOps misc;

  int dim() const { return static_cast<int>(W_O.rows()); }

  void validate() const {
    const int n_head = static_cast<int>(heads.size());
    if (n_head < 1) throw DomainError("layer needs at least one head");
    const int d = dim();
    if (W_O.cols() != d) throw DomainError("W_O must be d x d");
    if (d % n_head != 0) throw DomainError("n_head must divide d");
    const int d_v = d / n_head;
    for (const auto& h : heads) {
      if (h.W_V.rows() != d_v || h.W_V.cols() != d) throw DomainError("W_V must be (d/n_head) x d");
      if (h.W_Q.cols() != d || h.W_K.cols() != d || h.W_Q.rows() != h.W_K.rows())
        throw DomainError("W_Q and W_K must be d_K x d");
    }
  }
};

/// sigma_t^+ = W_O concat(o_t^1, ..., o_t^H) before any misc operation.
template <typename Scalar>
Vector<Scalar> multi_head_attention(const LayerParams<Scalar>& params, const Matrix<Scalar>& sigmas,
                                    int t) {
  const int d = params.dim();
  const int d_v = d / static_cast<int>(params.heads.size());
  Vector<Scalar> concat(d);
  for (std::size_t h = 0; h < params.heads.size(); ++h)
    concat.segment(static_cast<Eigen::Index>(h) * d_v, d_v) = head_output(params.heads[h], sigmas, t);
  return params.W_O * concat;
}

/**
 * One decoder layer, position by position:
 *   y = MultiHeadAttention; y += sigma_t; y = LayerNorm(y);
 *   y = y + FFN(y); y = LayerNorm(y),
 * each step after attention gated by `params.misc`. Position t reads only
 * columns 1..t of `sigmas`.
 */
template <typename Scalar>
Matrix<Scalar> layer_forward(const LayerParams<Scalar>& params, const Matrix<Scalar>& sigmas) {
  params.validate();
  if (sigmas.rows() != params.dim()) throw DomainError("layer_forward: input dimension mismatch");
  Matrix<Scalar> out(sigmas.rows(), sigmas.cols());
  for (int t = 1; t <= sigmas.cols(); ++t) {
    Vector<Scalar> y = multi_head_attention(params, sigmas, t);
    if (params.misc.residual) y += sigmas.col(t - 1);
    if (params.misc.layer_norm) y = layer_norm(y, params.norm1);
    if (params.misc.feed_forward) y += params.ffn(y);
    if (params.misc.layer_norm) y = layer_norm(y, params.norm2);
    out.col(t - 1) = y;
  }
  return out;
}

/// L^h = W_O concat(0, ..., W_V^h, ..., 0), a d x d matrix.
template <typename Scalar>
Matrix<Scalar> head_lift(const LayerParams<Scalar>& params, std::size_t h) {
  const int d_v = params.dim() / static_cast<int>(params.heads.size());
  return params.W_O.middleCols(static_cast<Eigen::Index>(h) * d_v, d_v) * params.heads.at(h).W_V;
}

/**
 * sigma_t^+(f) = sum_{s<=t} sigma_s(y_s) with y_s = sum_h alpha(s; t, h) (L^h)^T f.
 * Describes attention alone, so every misc operation must be disabled.
 */
template <typename Scalar>
Scalar simplified_form(const LayerParams<Scalar>& params, const Matrix<Scalar>& sigmas, int t,
                       const Vector<Scalar>& f) {
  params.validate();
  if (params.misc.any()) throw DomainError("simplified_form requires misc operations disabled");
  if (f.size() != params.dim()) throw DomainError("simplified_form: f has the wrong dimension");
  Matrix<Scalar> y = Matrix<Scalar>::Zero(params.dim(), t);
  for (std::size_t h = 0; h < params.heads.size(); ++h) {
    const Vector<Scalar> lifted = head_lift(params, h).transpose() * f;
    const Vector<Scalar> alpha = attention_weights(params.heads[h], sigmas, t);
    y += lifted * alpha.transpose();
  }
  return sigmas.leftCols(t).cwiseProduct(y).sum();
}

/// sigma^(0), sigma^(1), ..., sigma^(L) through a stack of layers.
template <typename Scalar>
std::vector<Matrix<Scalar>> forward_stack(const std::vector<LayerParams<Scalar>>& layers,
                                          const Matrix<Scalar>& sigma0) {
  std::vector<Matrix<Scalar>> outs{sigma0};
  for (const auto& layer : layers) outs.push_back(layer_forward(layer, outs.back()));
  return outs;
}

/// Seeded Gaussian parameters scaled by 1/sqrt(d); d_K = d_V = d / n_head.
LayerParams<double> random_layer_params(int d, int n_head, std::mt19937_64& rng,
                                        Activation activation = Activation::kGelu);

/// Seeded Gaussian d x (m+1) embedding scaled by 1/sqrt(d).
MatrixXd random_embedding(int d, int m, std::mt19937_64& rng);

}  // namespace hmmfp
