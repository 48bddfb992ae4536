#pragma once

// Mean-centering PCA front end. Components are the top-k eigenvectors of the
// sample covariance; signs are normalized so each component's
// largest-magnitude entry is positive, which makes fits reproducible.

#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace gasid {

struct PcaModel {
  Eigen::VectorXd mean;         // length p
  Eigen::MatrixXd components;   // k x p, orthonormal rows
  Eigen::VectorXd eigenvalues;  // length k, non-increasing, >= 0
  double total_variance = 0.0;  // trace of the sample covariance

  Eigen::Index k() const { return components.rows(); }
  Eigen::Index n_features() const { return components.cols(); }
};

inline PcaModel pca_fit(const Eigen::MatrixXd& x, Eigen::Index k) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 2) throw std::invalid_argument("pca_fit needs at least 2 samples");
  if (k < 1 || k > std::min(n, p)) throw std::invalid_argument("pca component count out of range");

  PcaModel model;
  model.mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  model.total_variance = cov.trace();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw std::runtime_error("pca eigendecomposition failed");

  // Eigen returns eigenvalues ascending; take the top k in descending order.
  model.eigenvalues.resize(k);
  model.components.resize(k, p);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = p - 1 - i;
    model.eigenvalues[i] = std::max(es.eigenvalues()[src], 0.0);
    Eigen::VectorXd comp = es.eigenvectors().col(src);
    Eigen::Index max_idx = 0;
    comp.cwiseAbs().maxCoeff(&max_idx);
    if (comp[max_idx] < 0.0) comp = -comp;
    model.components.row(i) = comp.transpose();
  }
  return model;
}

inline Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.n_features()) {
    throw std::invalid_argument("pca_transform feature count mismatch");
  }
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

// Cumulative fraction of total variance explained by the first 1..k
// components. Non-decreasing; reaches 1 when k equals the data rank.
inline std::vector<double> explained_variance_curve(const PcaModel& model) {
  if (!(model.total_variance > 0.0)) {
    throw std::invalid_argument("explained variance undefined for zero total variance");
  }
  std::vector<double> curve(static_cast<std::size_t>(model.k()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < model.k(); ++i) {
    acc += model.eigenvalues[i];
    curve[static_cast<std::size_t>(i)] = std::min(acc / model.total_variance, 1.0);
  }
  return curve;
}

}  // namespace gasid
