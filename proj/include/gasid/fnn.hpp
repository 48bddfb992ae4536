#pragma once

// One-hidden-layer feedforward network: ReLU hidden activation, a sigmoid +
// cross-entropy head for label scores or a linear + MSE head for threshold
// regression, inverted dropout, analytic backprop and Adam.
//
// Dropout masks are per-batch vectors whose entries are 0 or 1/p (inverted
// scaling at train time); inference runs maskless. Forward passes process
// rows one at a time so batched and per-row evaluation are bit-identical.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gasid/rng.hpp"

namespace gasid {

enum class Head { sigmoid_xent, linear_mse };

inline std::string head_name(Head h) {
  return h == Head::sigmoid_xent ? "sigmoid_xent" : "linear_mse";
}

inline Head head_from_name(const std::string& s) {
  if (s == "sigmoid_xent") return Head::sigmoid_xent;
  if (s == "linear_mse") return Head::linear_mse;
  throw std::invalid_argument("unknown head: " + s);
}

struct FnnLayout {
  Eigen::Index n_in = 1;
  Eigen::Index n_hidden = 1;
  Eigen::Index n_out = 1;
  Head head = Head::sigmoid_xent;

  void validate() const {
    if (n_in < 1 || n_hidden < 1 || n_out < 1) {
      throw std::invalid_argument("all layer sizes must be at least 1");
    }
  }
};

struct FnnModel {
  Eigen::MatrixXd w1;  // n_hidden x n_in
  Eigen::VectorXd b1;  // n_hidden
  Eigen::MatrixXd w2;  // n_out x n_hidden
  Eigen::VectorXd b2;  // n_out
  FnnLayout layout;
};

struct TrainConfig {
  double retention_input = 0.95;
  double retention_hidden = 0.2;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 128;
  int epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(retention_input > 0.0 && retention_input <= 1.0) ||
        !(retention_hidden > 0.0 && retention_hidden <= 1.0)) {
      throw std::invalid_argument("retention probabilities must lie in (0, 1]");
    }
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
      throw std::invalid_argument("Adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
    if (epochs < 1) throw std::invalid_argument("epoch count must be at least 1");
  }
};

struct DropoutMasks {
  Eigen::VectorXd input;   // n_in, entries 0 or 1/p1
  Eigen::VectorXd hidden;  // n_hidden, entries 0 or 1/p2
};

inline DropoutMasks make_dropout_masks(Rng& rng, const FnnLayout& layout, double p1, double p2) {
  DropoutMasks m;
  m.input.resize(layout.n_in);
  m.hidden.resize(layout.n_hidden);
  for (Eigen::Index i = 0; i < layout.n_in; ++i) m.input[i] = rng.bernoulli(p1) ? 1.0 / p1 : 0.0;
  for (Eigen::Index i = 0; i < layout.n_hidden; ++i) m.hidden[i] = rng.bernoulli(p2) ? 1.0 / p2 : 0.0;
  return m;
}

namespace detail {

inline void check_mask_vector(const Eigen::VectorXd& mask, Eigen::Index expected,
                              const char* which) {
  if (mask.size() != expected) {
    throw std::invalid_argument(std::string(which) + " dropout mask has wrong length");
  }
  const double scale = mask.maxCoeff();
  if (scale < 0.0 || (scale > 0.0 && scale < 1.0)) {
    throw std::invalid_argument(std::string(which) + " dropout mask entries must be 0 or 1/p");
  }
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0 && mask[i] != scale) {
      throw std::invalid_argument(std::string(which) + " dropout mask entries must be 0 or 1/p");
    }
  }
}

struct ForwardCache {
  Eigen::MatrixXd x_masked;  // n x n_in
  Eigen::MatrixXd z1;        // n x n_hidden, pre-activation
  Eigen::MatrixXd hidden;    // n x n_hidden, post-ReLU
  Eigen::MatrixXd h_masked;  // n x n_hidden
  Eigen::MatrixXd output;    // n x n_out, post-head
};

inline ForwardCache forward_pass(const FnnModel& model, const Eigen::MatrixXd& x,
                                 const DropoutMasks* masks) {
  model.layout.validate();
  if (x.cols() != model.layout.n_in) throw std::invalid_argument("input width mismatch");
  if (masks != nullptr) {
    check_mask_vector(masks->input, model.layout.n_in, "input");
    check_mask_vector(masks->hidden, model.layout.n_hidden, "hidden");
  }

  ForwardCache c;
  c.x_masked = masks ? (x.array().rowwise() * masks->input.transpose().array()).matrix() : x;
  const Eigen::Index n = x.rows();
  c.z1.resize(n, model.layout.n_hidden);
  c.output.resize(n, model.layout.n_out);
  for (Eigen::Index i = 0; i < n; ++i) {
    c.z1.row(i) = (model.w1 * c.x_masked.row(i).transpose() + model.b1).transpose();
  }
  c.hidden = c.z1.cwiseMax(0.0);
  c.h_masked = masks ? (c.hidden.array().rowwise() * masks->hidden.transpose().array()).matrix()
                     : c.hidden;
  for (Eigen::Index i = 0; i < n; ++i) {
    c.output.row(i) = (model.w2 * c.h_masked.row(i).transpose() + model.b2).transpose();
  }
  if (model.layout.head == Head::sigmoid_xent) {
    c.output = c.output.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  }
  return c;
}

}  // namespace detail

// Weights ~ N(0, 1/fan_in), biases zero.
inline FnnModel fnn_init(const FnnLayout& layout, std::uint64_t seed) {
  layout.validate();
  Rng rng(seed);
  FnnModel m;
  m.layout = layout;
  m.w1.resize(layout.n_hidden, layout.n_in);
  m.w2.resize(layout.n_out, layout.n_hidden);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(layout.n_in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(layout.n_hidden));
  for (Eigen::Index i = 0; i < m.w1.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.w1.cols(); ++j) m.w1(i, j) = s1 * rng.normal();
  }
  for (Eigen::Index i = 0; i < m.w2.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.w2.cols(); ++j) m.w2(i, j) = s2 * rng.normal();
  }
  m.b1 = Eigen::VectorXd::Zero(layout.n_hidden);
  m.b2 = Eigen::VectorXd::Zero(layout.n_out);
  return m;
}

struct ForwardResult {
  Eigen::MatrixXd hidden;  // post-ReLU, pre hidden-mask
  Eigen::MatrixXd output;  // post-head
};

inline ForwardResult fnn_forward(const FnnModel& model, const Eigen::MatrixXd& x,
                                 const DropoutMasks* masks = nullptr) {
  auto cache = detail::forward_pass(model, x, masks);
  return ForwardResult{std::move(cache.hidden), std::move(cache.output)};
}

constexpr double kScoreClip = 1e-7;

// Mean over the batch of the per-sample label-summed cross entropy, natural
// log, scores clipped to [1e-7, 1 - 1e-7].
inline double loss_xent(const Eigen::MatrixXd& s, const Eigen::MatrixXd& y) {
  if (s.rows() != y.rows() || s.cols() != y.cols()) {
    throw std::invalid_argument("score/target shape mismatch");
  }
  if (s.rows() == 0) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const double sij = std::min(std::max(s(i, j), kScoreClip), 1.0 - kScoreClip);
      total -= y(i, j) * std::log(sij) + (1.0 - y(i, j)) * std::log(1.0 - sij);
    }
  }
  return total / static_cast<double>(s.rows());
}

// Mean of squared differences over every slot.
inline double loss_mse(const Eigen::MatrixXd& t_hat, const Eigen::MatrixXd& t) {
  if (t_hat.rows() != t.rows() || t_hat.cols() != t.cols()) {
    throw std::invalid_argument("prediction/target shape mismatch");
  }
  if (t_hat.size() == 0) throw std::invalid_argument("empty batch");
  return (t_hat - t).squaredNorm() / static_cast<double>(t_hat.size());
}

struct FnnGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// Analytic gradients of the configured loss at fixed dropout masks.
inline FnnGradients fnn_gradients(const FnnModel& model, const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& targets,
                                  const DropoutMasks* masks = nullptr) {
  if (targets.rows() != x.rows() || targets.cols() != model.layout.n_out) {
    throw std::invalid_argument("target shape mismatch");
  }
  const auto cache = detail::forward_pass(model, x, masks);
  const Eigen::Index n = x.rows();

  Eigen::MatrixXd dz2;  // n x n_out
  if (model.layout.head == Head::sigmoid_xent) {
    dz2 = (cache.output - targets) / static_cast<double>(n);
  } else {
    dz2 = 2.0 * (cache.output - targets) / static_cast<double>(cache.output.size());
  }

  FnnGradients g;
  g.w2.noalias() = dz2.transpose() * cache.h_masked;
  g.b2 = dz2.colwise().sum().transpose();

  Eigen::MatrixXd dh = dz2 * model.w2;  // n x n_hidden
  if (masks != nullptr) {
    dh = (dh.array().rowwise() * masks->hidden.transpose().array()).matrix();
  }
  Eigen::MatrixXd dz1 =
      (cache.z1.array() > 0.0).select(dh, Eigen::MatrixXd::Zero(n, model.layout.n_hidden));
  g.w1.noalias() = dz1.transpose() * cache.x_masked;
  g.b1 = dz1.colwise().sum().transpose();
  return g;
}

struct AdamState {
  FnnGradients m;
  FnnGradients v;
  long step = 0;
};

inline AdamState make_adam_state(const FnnLayout& layout) {
  AdamState s;
  s.m.w1 = Eigen::MatrixXd::Zero(layout.n_hidden, layout.n_in);
  s.m.b1 = Eigen::VectorXd::Zero(layout.n_hidden);
  s.m.w2 = Eigen::MatrixXd::Zero(layout.n_out, layout.n_hidden);
  s.m.b2 = Eigen::VectorXd::Zero(layout.n_out);
  s.v = s.m;
  return s;
}

// Bias-corrected Adam update; increments the step counter.
inline void adam_step(AdamState& state, FnnModel& model, const FnnGradients& grads,
                      const TrainConfig& config) {
  config.validate();
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto update = [&](Eigen::MatrixXd& m, Eigen::MatrixXd& v, Eigen::MatrixXd& param,
                    const Eigen::MatrixXd& g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    param -= (config.learning_rate * (m / bc1).array() / ((v / bc2).array().sqrt() + config.epsilon))
                 .matrix();
  };
  auto update_vec = [&](Eigen::VectorXd& m, Eigen::VectorXd& v, Eigen::VectorXd& param,
                        const Eigen::VectorXd& g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    param -= (config.learning_rate * (m / bc1).array() / ((v / bc2).array().sqrt() + config.epsilon))
                 .matrix();
  };
  update(state.m.w1, state.v.w1, model.w1, grads.w1);
  update_vec(state.m.b1, state.v.b1, model.b1, grads.b1);
  update(state.m.w2, state.v.w2, model.w2, grads.w2);
  update_vec(state.m.b2, state.v.b2, model.b2, grads.b2);
}

struct TrainResult {
  FnnModel model;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Mini-batch training with shuffled batches and fresh per-batch dropout
// masks. Deterministic for a given (layout, data, config).
inline TrainResult fnn_train(const FnnLayout& layout, const Eigen::MatrixXd& x,
                             const Eigen::MatrixXd& targets, const TrainConfig& config) {
  layout.validate();
  config.validate();
  if (x.rows() == 0) throw std::invalid_argument("training data is empty");
  if (x.cols() != layout.n_in) throw std::invalid_argument("input width mismatch");
  if (targets.rows() != x.rows() || targets.cols() != layout.n_out) {
    throw std::invalid_argument("target shape mismatch");
  }
  if (layout.head == Head::sigmoid_xent) {
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
      const double v = targets.data()[i];
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("sigmoid_xent targets must be 0/1 bits");
      }
    }
  }

  TrainResult result;
  result.model = fnn_init(layout, derive_seed(config.seed, "init"));
  AdamState adam = make_adam_state(layout);
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));

  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index bn = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd bx(bn, layout.n_in);
      Eigen::MatrixXd bt(bn, layout.n_out);
      for (Eigen::Index r = 0; r < bn; ++r) {
        bx.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);
        bt.row(r) = targets.row(order[static_cast<std::size_t>(start + r)]);
      }
      const DropoutMasks masks = make_dropout_masks(dropout_rng, layout, config.retention_input,
                                                    config.retention_hidden);
      const auto fwd = detail::forward_pass(result.model, bx, &masks);
      const double batch_loss = layout.head == Head::sigmoid_xent ? loss_xent(fwd.output, bt)
                                                                  : loss_mse(fwd.output, bt);
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch offset " + std::to_string(start));
      }
      const FnnGradients grads = fnn_gradients(result.model, bx, bt, &masks);
      adam_step(adam, result.model, grads, config);
      loss_sum += batch_loss * static_cast<double>(bn);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

// Maskless forward pass.
inline Eigen::MatrixXd predict_scores(const FnnModel& model, const Eigen::MatrixXd& x) {
  return fnn_forward(model, x).output;
}

}  // namespace gasid
