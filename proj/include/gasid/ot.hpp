#pragma once

// Per-instance optimal thresholding: candidate cuts from sorted score
// midpoints, per-sample F1 maximization for training targets, a score ->
// threshold regression net, and the final decision rules (learned threshold
// vs fixed 0.5). Predictions use the strict rule label = 1(score > t).

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gasid/fnn.hpp"

namespace gasid {

// [0, midpoints of adjacent sorted scores, 1]; length L + 1, non-decreasing.
inline std::vector<double> candidate_thresholds(const Eigen::VectorXd& s) {
  if (s.size() < 1) throw std::invalid_argument("need at least one score");
  std::vector<double> sorted(s.data(), s.data() + s.size());
  for (double v : sorted) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("scores must lie in [0, 1]");
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> candidates;
  candidates.reserve(sorted.size() + 1);
  candidates.push_back(0.0);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  }
  candidates.push_back(1.0);
  return candidates;
}

// Per-sample F1 = 2TP / (2TP + FP + FN); 1 when the sample has no positives
// and none are predicted.
inline double sample_f1(const Eigen::VectorXi& y, const Eigen::VectorXi& y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("label length mismatch");
  int tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y_hat[i] == 1 && y[i] == 1) ++tp;
    if (y_hat[i] == 1 && y[i] == 0) ++fp;
    if (y_hat[i] == 0 && y[i] == 1) ++fn;
  }
  const int denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

// Scans every candidate threshold and keeps the best F1; ties break toward
// the larger threshold.
inline std::pair<double, double> optimal_threshold(const Eigen::VectorXd& s,
                                                   const Eigen::VectorXi& y) {
  if (s.size() != y.size()) throw std::invalid_argument("score/label length mismatch");
  const std::vector<double> candidates = candidate_thresholds(s);
  double best_t = candidates.front();
  double best_f1 = -1.0;
  Eigen::VectorXi y_hat(s.size());
  for (double t : candidates) {
    for (Eigen::Index i = 0; i < s.size(); ++i) y_hat[i] = s[i] > t ? 1 : 0;
    const double f1 = sample_f1(y, y_hat);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return {best_t, best_f1};
}

// Optimal threshold per row; the regression targets for the threshold net.
inline Eigen::VectorXd ot_targets(const Eigen::MatrixXd& scores, const Eigen::MatrixXi& labels) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
    throw std::invalid_argument("score/label shape mismatch");
  }
  Eigen::VectorXd t(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    t[i] = optimal_threshold(scores.row(i).transpose(), labels.row(i).transpose()).first;
  }
  return t;
}

struct ThresholdModel {
  FnnModel net;  // linear_mse head, n_in = L, n_out = 1
};

// Trains the score -> threshold regressor on raw (unsorted) score vectors.
inline ThresholdModel fit_threshold_net(const Eigen::MatrixXd& scores,
                                        const Eigen::VectorXd& thresholds,
                                        const TrainConfig& config, Eigen::Index n_hidden = 64) {
  if (scores.rows() == 0) throw std::invalid_argument("no training scores");
  if (thresholds.size() != scores.rows()) {
    throw std::invalid_argument("threshold count does not match score rows");
  }
  FnnLayout layout{scores.cols(), n_hidden, 1, Head::linear_mse};
  const TrainResult res = fnn_train(layout, scores, thresholds, config);
  return ThresholdModel{res.model};
}

// Per sample: t = clamp(net(scores), [0, 1]); label i = 1(score_i > t).
inline Eigen::MatrixXi predict_labels_ot(const Eigen::MatrixXd& scores,
                                         const ThresholdModel& model) {
  if (scores.cols() != model.net.layout.n_in) {
    throw std::invalid_argument("score width does not match threshold net input");
  }
  const Eigen::MatrixXd t_hat = predict_scores(model.net, scores);
  Eigen::MatrixXi labels(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double t = std::min(std::max(t_hat(i, 0), 0.0), 1.0);
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      labels(i, j) = scores(i, j) > t ? 1 : 0;
    }
  }
  return labels;
}

inline Eigen::MatrixXi predict_labels_fixed(const Eigen::MatrixXd& scores, double t = 0.5) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  Eigen::MatrixXi labels(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      labels(i, j) = scores(i, j) > t ? 1 : 0;
    }
  }
  return labels;
}

}  // namespace gasid
