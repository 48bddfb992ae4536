#pragma once

// JSON model container. Every trained artifact is stored as a pipeline
// record: a role tag (fnn_fixed | fnn_ot | pls_br), the PCA front end, and
// the role-specific networks or per-label PLS models. Weight arrays are
// flattened row-major; format_version gates loading.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasid/fnn.hpp"
#include "gasid/ot.hpp"
#include "gasid/pca.hpp"
#include "gasid/pls.hpp"

namespace gasid {

constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  }
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::runtime_error("corrupted matrix payload: size does not match shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = flat[k++];
  }
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index expected = -1) {
  const auto flat = j.get<std::vector<double>>();
  if (expected >= 0 && flat.size() != static_cast<std::size_t>(expected)) {
    throw std::runtime_error("corrupted vector payload: wrong length");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(flat.size()));
  for (std::size_t i = 0; i < flat.size(); ++i) v[static_cast<Eigen::Index>(i)] = flat[i];
  return v;
}

}  // namespace detail

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return nlohmann::json{
      {"retention_input", c.retention_input}, {"retention_hidden", c.retention_hidden},
      {"learning_rate", c.learning_rate},     {"beta1", c.beta1},
      {"beta2", c.beta2},                     {"epsilon", c.epsilon},
      {"batch_size", c.batch_size},           {"epochs", c.epochs},
      {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.retention_input = j.value("retention_input", c.retention_input);
  c.retention_hidden = j.value("retention_hidden", c.retention_hidden);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

inline nlohmann::json fnn_to_json(const FnnModel& m, const std::string& role) {
  return nlohmann::json{{"role", role},
                        {"layout",
                         {{"n_in", m.layout.n_in},
                          {"n_hidden", m.layout.n_hidden},
                          {"n_out", m.layout.n_out},
                          {"head", head_name(m.layout.head)}}},
                        {"w1", detail::matrix_to_json(m.w1)},
                        {"b1", detail::vector_to_json(m.b1)},
                        {"w2", detail::matrix_to_json(m.w2)},
                        {"b2", detail::vector_to_json(m.b2)}};
}

inline FnnModel fnn_from_json(const nlohmann::json& j) {
  FnnModel m;
  const auto& layout = j.at("layout");
  m.layout.n_in = layout.at("n_in").get<Eigen::Index>();
  m.layout.n_hidden = layout.at("n_hidden").get<Eigen::Index>();
  m.layout.n_out = layout.at("n_out").get<Eigen::Index>();
  m.layout.head = head_from_name(layout.at("head").get<std::string>());
  m.layout.validate();
  m.w1 = detail::matrix_from_json(j.at("w1"));
  m.b1 = detail::vector_from_json(j.at("b1"), m.layout.n_hidden);
  m.w2 = detail::matrix_from_json(j.at("w2"));
  m.b2 = detail::vector_from_json(j.at("b2"), m.layout.n_out);
  if (m.w1.rows() != m.layout.n_hidden || m.w1.cols() != m.layout.n_in ||
      m.w2.rows() != m.layout.n_out || m.w2.cols() != m.layout.n_hidden) {
    throw std::runtime_error("corrupted network payload: weight shapes disagree with layout");
  }
  return m;
}

inline nlohmann::json pca_to_json(const PcaModel& m) {
  return nlohmann::json{{"role", "pca"},
                        {"mean", detail::vector_to_json(m.mean)},
                        {"components", detail::matrix_to_json(m.components)},
                        {"eigenvalues", detail::vector_to_json(m.eigenvalues)},
                        {"total_variance", m.total_variance}};
}

inline PcaModel pca_from_json(const nlohmann::json& j) {
  PcaModel m;
  m.mean = detail::vector_from_json(j.at("mean"));
  m.components = detail::matrix_from_json(j.at("components"));
  m.eigenvalues = detail::vector_from_json(j.at("eigenvalues"), m.components.rows());
  m.total_variance = j.at("total_variance").get<double>();
  if (m.components.cols() != m.mean.size()) {
    throw std::runtime_error("corrupted pca payload: component width mismatch");
  }
  return m;
}

inline nlohmann::json pls_to_json(const PlsModel& m) {
  return nlohmann::json{{"x_mean", detail::vector_to_json(m.x_mean)},
                        {"y_mean", detail::vector_to_json(m.y_mean)},
                        {"weights", detail::matrix_to_json(m.weights)},
                        {"x_loadings", detail::matrix_to_json(m.x_loadings)},
                        {"y_loadings", detail::matrix_to_json(m.y_loadings)},
                        {"residual_norms", m.residual_norms},
                        {"k", m.k}};
}

inline PlsModel pls_from_json(const nlohmann::json& j) {
  PlsModel m;
  m.x_mean = detail::vector_from_json(j.at("x_mean"));
  m.y_mean = detail::vector_from_json(j.at("y_mean"));
  m.weights = detail::matrix_from_json(j.at("weights"));
  m.x_loadings = detail::matrix_from_json(j.at("x_loadings"));
  m.y_loadings = detail::matrix_from_json(j.at("y_loadings"));
  m.residual_norms = j.at("residual_norms").get<std::vector<double>>();
  m.k = j.at("k").get<Eigen::Index>();
  if (m.weights.rows() != m.k || m.x_loadings.rows() != m.k || m.y_loadings.rows() != m.k ||
      m.weights.cols() != m.x_mean.size() || m.y_loadings.cols() != m.y_mean.size()) {
    throw std::runtime_error("corrupted pls payload: component shapes disagree");
  }
  return m;
}

// A trained end-to-end pipeline: PCA front end plus the role-specific parts.
struct PipelineModel {
  std::string kind;  // fnn_fixed | fnn_ot | pls_br
  PcaModel pca;
  bool pca_features = true;              // false: the model consumes raw pixels
  std::optional<FnnModel> fnn;           // fnn_fixed, fnn_ot
  std::optional<ThresholdModel> tnet;    // fnn_ot
  std::vector<PlsDaModel> pls;           // pls_br, one per label
  TrainConfig train_config;              // provenance
  std::uint64_t seed = 0;
};

inline nlohmann::json pipeline_to_json(const PipelineModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["role"] = m.kind;
  j["pca"] = pca_to_json(m.pca);
  j["pca_features"] = m.pca_features;
  j["train_config"] = train_config_to_json(m.train_config);
  j["seed"] = m.seed;
  if (m.fnn) j["fnn"] = fnn_to_json(*m.fnn, "fnn");
  if (m.tnet) j["threshold_net"] = fnn_to_json(m.tnet->net, "threshold_net");
  if (!m.pls.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PlsDaModel& p : m.pls) arr.push_back(pls_to_json(p.pls));
    j["pls_br"] = nlohmann::json{{"role", "pls_br"}, {"labels", arr}};
  }
  return j;
}

inline PipelineModel pipeline_from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format_version " + std::to_string(version));
  }
  PipelineModel m;
  m.kind = j.at("role").get<std::string>();
  if (m.kind != "fnn_fixed" && m.kind != "fnn_ot" && m.kind != "pls_br") {
    throw std::runtime_error("unknown model role: " + m.kind);
  }
  m.pca = pca_from_json(j.at("pca"));
  m.pca_features = j.value("pca_features", true);
  m.train_config = train_config_from_json(j.at("train_config"));
  m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("fnn")) m.fnn = fnn_from_json(j.at("fnn"));
  if (j.contains("threshold_net")) m.tnet = ThresholdModel{fnn_from_json(j.at("threshold_net"))};
  if (j.contains("pls_br")) {
    for (const auto& item : j.at("pls_br").at("labels")) {
      m.pls.push_back(PlsDaModel{pls_from_json(item)});
    }
  }
  if ((m.kind == "fnn_fixed" || m.kind == "fnn_ot") && !m.fnn) {
    throw std::runtime_error("model role " + m.kind + " requires an fnn section");
  }
  if (m.kind == "fnn_ot" && !m.tnet) {
    throw std::runtime_error("model role fnn_ot requires a threshold_net section");
  }
  if (m.kind == "pls_br" && m.pls.empty()) {
    throw std::runtime_error("model role pls_br requires per-label models");
  }
  return m;
}

inline void save_model(const PipelineModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << pipeline_to_json(m).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

inline PipelineModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return pipeline_from_json(j);
}

// Label predictions of a stored pipeline on raw spectra.
inline Eigen::MatrixXi pipeline_predict(const PipelineModel& m, const Eigen::MatrixXd& absorbance) {
  const Eigen::MatrixXd feats = m.pca_features ? pca_transform(m.pca, absorbance) : absorbance;
  if (m.kind == "fnn_fixed") {
    return predict_labels_fixed(predict_scores(*m.fnn, feats));
  }
  if (m.kind == "fnn_ot") {
    return predict_labels_ot(predict_scores(*m.fnn, feats), *m.tnet);
  }
  return plsbr_predict(m.pls, feats);
}

}  // namespace gasid
