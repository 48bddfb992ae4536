#pragma once

// Partial least squares via NIPALS, PLS-DA through complementary dummy
// variables, and the binary-relevance wrapper that trains one PLS-DA model
// per label.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gasid {

struct PlsModel {
  Eigen::VectorXd x_mean;             // p
  Eigen::VectorXd y_mean;             // q
  Eigen::MatrixXd weights;            // k x p, unit-norm weight vectors
  Eigen::MatrixXd x_loadings;         // k x p
  Eigen::MatrixXd y_loadings;         // k x q
  std::vector<double> residual_norms; // ||X residual||_F after each component
  Eigen::Index k = 0;                 // components actually extracted
};

// Standard NIPALS: per component, iterate weight/score/loading until the
// score vector stabilizes (change norm < 1e-10 or 500 inner iterations),
// then deflate X and Y by the extracted component.
inline PlsModel nipals_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::Index k) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::Index q = y.cols();
  if (n < 2) throw std::invalid_argument("nipals_fit needs at least 2 samples");
  if (y.rows() != n) throw std::invalid_argument("X/Y row mismatch");
  if (k < 1 || k > std::min(n, p)) throw std::invalid_argument("component count out of range");

  PlsModel model;
  model.x_mean = x.colwise().mean();
  model.y_mean = y.colwise().mean();
  Eigen::MatrixXd xd = x.rowwise() - model.x_mean.transpose();
  Eigen::MatrixXd yd = y.rowwise() - model.y_mean.transpose();

  const double x_scale = xd.norm();
  if (!(x_scale > 1e-12)) throw std::invalid_argument("X has zero variance");

  model.weights.resize(k, p);
  model.x_loadings.resize(k, p);
  model.y_loadings.resize(k, q);
  model.residual_norms.reserve(static_cast<std::size_t>(k));

  constexpr double kTol = 1e-10;
  constexpr int kMaxInner = 500;
  const double degenerate = 1e-12 * x_scale;

  for (Eigen::Index comp = 0; comp < k; ++comp) {
    if (xd.norm() <= degenerate) break;  // X residual exhausted

    // Start from the Y column with the largest residual norm.
    Eigen::Index start_col = 0;
    yd.colwise().squaredNorm().maxCoeff(&start_col);
    Eigen::VectorXd u = yd.col(start_col);
    if (u.squaredNorm() <= degenerate * degenerate) break;  // Y fully explained

    Eigen::VectorXd t_prev = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w(p), t(n), qv(q);
    for (int it = 0; it < kMaxInner; ++it) {
      w = xd.transpose() * u;
      const double wn = w.norm();
      if (!(wn > 0.0)) throw std::runtime_error("degenerate weight vector in NIPALS");
      w /= wn;
      t = xd * w;
      const double tt = t.squaredNorm();
      if (!(tt > 0.0)) throw std::runtime_error("degenerate score vector in NIPALS");
      qv = yd.transpose() * t / tt;
      if ((t - t_prev).norm() < kTol) break;
      t_prev = t;
      const double qq = qv.squaredNorm();
      if (!(qq > 0.0)) break;  // Y residual orthogonal; keep the current scores
      u = yd * qv / qq;
    }

    const double tt = t.squaredNorm();
    const Eigen::VectorXd p_load = xd.transpose() * t / tt;
    model.weights.row(comp) = w.transpose();
    model.x_loadings.row(comp) = p_load.transpose();
    model.y_loadings.row(comp) = qv.transpose();
    xd.noalias() -= t * p_load.transpose();
    yd.noalias() -= t * qv.transpose();
    model.residual_norms.push_back(xd.norm());
    model.k = comp + 1;
  }
  if (model.k == 0) throw std::runtime_error("NIPALS extracted no components");
  model.weights.conservativeResize(model.k, p);
  model.x_loadings.conservativeResize(model.k, p);
  model.y_loadings.conservativeResize(model.k, q);
  return model;
}

// Centered inputs mapped through the sequential component regression; the
// Y mean is restored.
inline Eigen::MatrixXd pls_predict(const PlsModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.x_mean.size()) throw std::invalid_argument("feature count mismatch");
  Eigen::MatrixXd xd = x.rowwise() - model.x_mean.transpose();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), model.y_mean.size());
  for (Eigen::Index comp = 0; comp < model.k; ++comp) {
    const Eigen::VectorXd t = xd * model.weights.row(comp).transpose();
    y.noalias() += t * model.y_loadings.row(comp);
    xd.noalias() -= t * model.x_loadings.row(comp);
  }
  y.rowwise() += model.y_mean.transpose();
  return y;
}

struct PlsDaModel {
  PlsModel pls;  // fitted on two complementary dummy columns [y==0, y==1]
};

inline PlsDaModel plsda_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, Eigen::Index k) {
  if (y.size() != x.rows()) throw std::invalid_argument("X/y row mismatch");
  int positives = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw std::invalid_argument("labels must be 0/1");
    positives += y[i];
  }
  if (positives == 0 || positives == y.size()) {
    throw std::invalid_argument("plsda_fit needs both classes present");
  }
  Eigen::MatrixXd dummies(x.rows(), 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    dummies(i, 0) = y[i] == 0 ? 1.0 : 0.0;
    dummies(i, 1) = y[i] == 1 ? 1.0 : 0.0;
  }
  return PlsDaModel{nipals_fit(x, dummies, k)};
}

// Class 1 iff the y=1 dummy outscores the y=0 dummy; exact ties resolve to 0.
inline Eigen::VectorXi plsda_predict(const PlsDaModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd scores = pls_predict(model.pls, x);
  Eigen::VectorXi out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = scores(i, 1) > scores(i, 0) ? 1 : 0;
  }
  return out;
}

// Binary relevance: one independent PLS-DA model per label column.
inline std::vector<PlsDaModel> plsbr_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXi& y,
                                         Eigen::Index k) {
  if (y.rows() != x.rows()) throw std::invalid_argument("X/Y row mismatch");
  if (y.cols() < 1) throw std::invalid_argument("need at least one label");
  std::vector<PlsDaModel> models;
  models.reserve(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    try {
      models.push_back(plsda_fit(x, y.col(j), k));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("label " + std::to_string(j) + ": " + e.what());
    }
  }
  return models;
}

inline Eigen::MatrixXi plsbr_predict(const std::vector<PlsDaModel>& models,
                                     const Eigen::MatrixXd& x) {
  if (models.empty()) throw std::invalid_argument("no per-label models");
  Eigen::MatrixXi out(x.rows(), static_cast<Eigen::Index>(models.size()));
  for (std::size_t j = 0; j < models.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = plsda_predict(models[j], x);
  }
  return out;
}

}  // namespace gasid
