#pragma once

// Multi-label evaluation: per-label and pooled confusion counts, micro
// averaged precision/recall/F1, Hamming loss, and per-gas minimum detectable
// concentration from binned recall.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gasid {

struct ConfusionCell {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

struct ConfusionCounts {
  std::vector<ConfusionCell> per_label;
  ConfusionCell pooled;
};

inline ConfusionCounts confusion_counts(const Eigen::MatrixXi& y, const Eigen::MatrixXi& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
    throw std::invalid_argument("label matrix shape mismatch");
  }
  ConfusionCounts counts;
  counts.per_label.resize(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    ConfusionCell& cell = counts.per_label[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (y(i, j) == 1) {
        y_hat(i, j) == 1 ? ++cell.tp : ++cell.fn;
      } else {
        y_hat(i, j) == 1 ? ++cell.fp : ++cell.tn;
      }
    }
    counts.pooled.tp += cell.tp;
    counts.pooled.fp += cell.fp;
    counts.pooled.fn += cell.fn;
    counts.pooled.tn += cell.tn;
  }
  return counts;
}

struct MicroMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int degenerate_ratios = 0;  // how many 0/0 ratios were defined as 1
};

// Pooled precision/recall/F1. A 0/0 ratio is defined as 1 and counted.
inline MicroMetrics micro_metrics(const ConfusionCounts& counts) {
  MicroMetrics m;
  const ConfusionCell& c = counts.pooled;
  if (c.tp + c.fp == 0) {
    m.precision = 1.0;
    ++m.degenerate_ratios;
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall = 1.0;
    ++m.degenerate_ratios;
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

// Fraction of (sample, label) slots predicted incorrectly.
inline double hamming_loss(const Eigen::MatrixXi& y, const Eigen::MatrixXi& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
    throw std::invalid_argument("label matrix shape mismatch");
  }
  if (y.size() == 0) throw std::invalid_argument("empty label matrix");
  long wrong = 0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (y(i, j) != y_hat(i, j)) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

struct CminResult {
  // Lower bin edge per gas; nullopt when no bin chain reaches the recall
  // floor ("not reached").
  std::vector<std::optional<double>> per_gas;
  std::vector<std::string> notes;
};

// Positive samples are binned by true concentration into (j*w, (j+1)*w]
// bins over (0, 10]. c_min for a gas is the lower edge of the lowest bin
// such that it and every higher bin reach the recall floor; empty bins are
// skipped and noted.
inline CminResult min_detectable_concentration(const Eigen::MatrixXi& y,
                                               const Eigen::MatrixXi& y_hat,
                                               const Eigen::MatrixXd& c, double bin_width = 0.5,
                                               double recall_floor = 0.9) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
    throw std::invalid_argument("label matrix shape mismatch");
  }
  if (c.rows() != y.rows() || c.cols() != y.cols()) {
    throw std::invalid_argument("concentration matrix shape mismatch");
  }
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  if (!(recall_floor > 0.0 && recall_floor <= 1.0)) {
    throw std::invalid_argument("recall floor must lie in (0, 1]");
  }

  const int n_bins = static_cast<int>(std::ceil(10.0 / bin_width));
  CminResult result;
  result.per_gas.resize(static_cast<std::size_t>(y.cols()));

  for (Eigen::Index g = 0; g < y.cols(); ++g) {
    std::vector<long> positives(static_cast<std::size_t>(n_bins), 0);
    std::vector<long> detected(static_cast<std::size_t>(n_bins), 0);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (y(i, g) != 1) continue;
      const double conc = c(i, g);
      int bin = static_cast<int>(std::ceil(conc / bin_width)) - 1;  // (0, w] -> bin 0
      bin = std::max(0, std::min(bin, n_bins - 1));
      positives[static_cast<std::size_t>(bin)] += 1;
      if (y_hat(i, g) == 1) detected[static_cast<std::size_t>(bin)] += 1;
    }

    std::optional<double> c_min;
    for (int bin = n_bins - 1; bin >= 0; --bin) {
      if (positives[static_cast<std::size_t>(bin)] == 0) {
        result.notes.push_back("gas " + std::to_string(g) + ": empty bin " +
                               std::to_string(bin) + " skipped");
        continue;
      }
      const double recall = static_cast<double>(detected[static_cast<std::size_t>(bin)]) /
                            static_cast<double>(positives[static_cast<std::size_t>(bin)]);
      if (recall >= recall_floor) {
        c_min = static_cast<double>(bin) * bin_width;
      } else {
        break;
      }
    }
    result.per_gas[static_cast<std::size_t>(g)] = c_min;
  }
  return result;
}

struct MetricsReport {
  MicroMetrics micro;
  double hamming = 0.0;
  CminResult cmin;
};

inline MetricsReport evaluate_predictions(const Eigen::MatrixXi& y, const Eigen::MatrixXi& y_hat,
                                          const Eigen::MatrixXd& c, double cmin_bin_width = 0.5,
                                          double cmin_recall_floor = 0.9) {
  MetricsReport report;
  report.micro = micro_metrics(confusion_counts(y, y_hat));
  report.hamming = hamming_loss(y, y_hat);
  report.cmin = min_detectable_concentration(y, y_hat, c, cmin_bin_width, cmin_recall_floor);
  return report;
}

}  // namespace gasid
