#pragma once

// Experiment orchestration: the (SNR x correlation-mode) dataset protocol,
// the train/threshold/evaluate pipeline for every roster model, dropout grid
// search, learning curves, and report/plot emission.
//
// Seeding: one master seed fans out into named substreams per dataset and
// stage, so any stage can be reproduced in isolation and full runs are
// bit-identical. (model, dataset) cells are independent; a failing cell
// records its error and leaves the other cells intact.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasid/dataset_io.hpp"
#include "gasid/fnn.hpp"
#include "gasid/metrics.hpp"
#include "gasid/model_io.hpp"
#include "gasid/ot.hpp"
#include "gasid/pca.hpp"
#include "gasid/pls.hpp"
#include "gasid/svg.hpp"
#include "gasid/synth.hpp"
#include "gasid/textio.hpp"

namespace gasid {

struct ValidationSpec {
  double holdout_fraction = 0.2;  // used when kfold == 1
  int kfold = 1;
};

struct ExperimentConfig {
  std::vector<double> snr_db_list{0.0, 10.0, 20.0, 30.0, 40.0, 50.0};
  std::vector<std::string> modes{"independent", "correlated"};
  int n_train = 10000;
  int n_test = 2500;
  std::uint64_t master_seed = 1;
  std::vector<std::string> roster{"fnn_fixed", "fnn_ot", "pls_br"};

  Eigen::Index pca_components = 0;  // 0 -> min(n_train, n_pixels)
  Eigen::Index fnn_hidden = 64;
  Eigen::Index tnet_hidden = 64;
  Eigen::Index pls_components = 20;
  bool pls_on_raw_pixels = false;

  TrainConfig fnn_train_config;   // seed overridden by the substream scheme
  TrainConfig tnet_train_config;  // the threshold net trains without dropout

  double cmin_bin_width = 0.5;
  double cmin_recall_floor = 0.9;
  ValidationSpec validation;

  std::uint64_t library_seed = 7;
  std::size_t n_gases = 9;
  std::size_t grid_points = 1000;
  double grid_lo = 1.0;
  double grid_hi = 7.0;
  double path_cm = 10.0;

  std::string out_dir;  // empty: keep everything in memory

  ExperimentConfig() {
    tnet_train_config.retention_input = 1.0;
    tnet_train_config.retention_hidden = 1.0;
  }

  void validate() const {
    if (n_train < 10 || n_test < 10) {
      throw std::invalid_argument("sample counts must be at least 10");
    }
    if (snr_db_list.empty()) throw std::invalid_argument("snr list must be nonempty");
    if (modes.empty()) throw std::invalid_argument("mode list must be nonempty");
    for (const std::string& m : modes) {
      if (m != "independent" && m != "correlated") {
        throw std::invalid_argument("unknown mode: " + m);
      }
    }
    if (roster.empty()) throw std::invalid_argument("model roster must be nonempty");
    if (validation.kfold < 1) throw std::invalid_argument("kfold must be at least 1");
    if (validation.kfold == 1 &&
        !(validation.holdout_fraction > 0.0 && validation.holdout_fraction < 1.0)) {
      throw std::invalid_argument("holdout fraction must lie in (0, 1)");
    }
    fnn_train_config.validate();
    tnet_train_config.validate();
  }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["snr_db_list"] = c.snr_db_list;
  j["modes"] = c.modes;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["master_seed"] = c.master_seed;
  j["roster"] = c.roster;
  j["pca_components"] = c.pca_components;
  j["fnn_hidden"] = c.fnn_hidden;
  j["tnet_hidden"] = c.tnet_hidden;
  j["pls_components"] = c.pls_components;
  j["pls_on_raw_pixels"] = c.pls_on_raw_pixels;
  j["fnn_train"] = train_config_to_json(c.fnn_train_config);
  j["tnet_train"] = train_config_to_json(c.tnet_train_config);
  j["cmin_bin_width"] = c.cmin_bin_width;
  j["cmin_recall_floor"] = c.cmin_recall_floor;
  j["validation"] = {{"holdout_fraction", c.validation.holdout_fraction},
                     {"kfold", c.validation.kfold}};
  j["library_seed"] = c.library_seed;
  j["n_gases"] = c.n_gases;
  j["grid_points"] = c.grid_points;
  j["grid_lo"] = c.grid_lo;
  j["grid_hi"] = c.grid_hi;
  j["path_cm"] = c.path_cm;
  j["out_dir"] = c.out_dir;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.snr_db_list = j.value("snr_db_list", c.snr_db_list);
  c.modes = j.value("modes", c.modes);
  c.n_train = j.value("n_train", c.n_train);
  c.n_test = j.value("n_test", c.n_test);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.roster = j.value("roster", c.roster);
  c.pca_components = j.value("pca_components", c.pca_components);
  c.fnn_hidden = j.value("fnn_hidden", c.fnn_hidden);
  c.tnet_hidden = j.value("tnet_hidden", c.tnet_hidden);
  c.pls_components = j.value("pls_components", c.pls_components);
  c.pls_on_raw_pixels = j.value("pls_on_raw_pixels", c.pls_on_raw_pixels);
  if (j.contains("fnn_train")) c.fnn_train_config = train_config_from_json(j.at("fnn_train"));
  if (j.contains("tnet_train")) c.tnet_train_config = train_config_from_json(j.at("tnet_train"));
  c.cmin_bin_width = j.value("cmin_bin_width", c.cmin_bin_width);
  c.cmin_recall_floor = j.value("cmin_recall_floor", c.cmin_recall_floor);
  if (j.contains("validation")) {
    c.validation.holdout_fraction =
        j.at("validation").value("holdout_fraction", c.validation.holdout_fraction);
    c.validation.kfold = j.at("validation").value("kfold", c.validation.kfold);
  }
  c.library_seed = j.value("library_seed", c.library_seed);
  c.n_gases = j.value("n_gases", c.n_gases);
  c.grid_points = j.value("grid_points", c.grid_points);
  c.grid_lo = j.value("grid_lo", c.grid_lo);
  c.grid_hi = j.value("grid_hi", c.grid_hi);
  c.path_cm = j.value("path_cm", c.path_cm);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.validate();
  return c;
}

// nlohmann objects keep keys sorted, so the dump is canonical.
inline std::string config_hash(const ExperimentConfig& c) {
  return hash_hex(fnv1a64(config_to_json(c).dump()));
}

inline std::string dataset_tag(const std::string& mode, double snr_db) {
  return mode + "/snr=" + format_double(snr_db);
}

// The (SNR x mode) protocol expressed purely through manifests.
inline std::vector<DatasetManifest> protocol_manifests(const ExperimentConfig& c) {
  c.validate();
  std::vector<DatasetManifest> out;
  for (const std::string& mode : c.modes) {
    for (double snr : c.snr_db_list) {
      DatasetManifest m;
      m.seed = derive_seed(c.master_seed, "dataset/" + dataset_tag(mode, snr));
      m.n_samples = static_cast<std::size_t>(c.n_train + c.n_test);
      m.mode = mode;
      m.snr_db = snr;
      m.path_cm = c.path_cm;
      m.library_seed = c.library_seed;
      m.n_gases = c.n_gases;
      m.grid_points = c.grid_points;
      m.grid_lo = c.grid_lo;
      m.grid_hi = c.grid_hi;
      out.push_back(std::move(m));
    }
  }
  return out;
}

struct CellResult {
  std::string model;
  std::string mode;
  double snr_db = 0.0;
  std::uint64_t manifest_seed = 0;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
  double train_seconds = 0.0;
};

struct VarianceCurve {
  std::string mode;
  double snr_db = 0.0;
  std::vector<double> curve;
};

struct GridCell {
  double p1 = 0.0;
  double p2 = 0.0;
  double hamming = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;  // p1-major order
  double best_p1 = 0.0;
  double best_p2 = 0.0;
};

struct CurvePoint {
  int size = 0;
  double train_loss = 0.0;  // Hamming loss on the training prefix
  double test_loss = 0.0;   // Hamming loss on the fixed test set
};

struct CurveSeries {
  std::string model;
  std::vector<CurvePoint> points;
};

struct RunReport {
  std::string config_hash_hex;
  nlohmann::json config;
  std::vector<CellResult> cells;
  std::vector<VarianceCurve> variance;
  std::vector<CurveSeries> curves;
  std::optional<GridResult> grid;
  double total_seconds = 0.0;
};

inline nlohmann::json cmin_to_json(const CminResult& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : c.per_gas) {
    if (v.has_value()) {
      arr.push_back(*v);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

inline nlohmann::json report_to_json(const RunReport& r, bool include_timings = true) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config_hash"] = r.config_hash_hex;
  j["config"] = r.config;
  nlohmann::json cells = nlohmann::json::array();
  for (const CellResult& c : r.cells) {
    nlohmann::json cj;
    cj["model"] = c.model;
    cj["mode"] = c.mode;
    cj["snr_db"] = c.snr_db;
    cj["manifest_seed"] = c.manifest_seed;
    cj["ok"] = c.ok;
    cj["error"] = c.error;
    if (c.ok) {
      cj["metrics"] = {{"precision", c.metrics.micro.precision},
                       {"recall", c.metrics.micro.recall},
                       {"f1", c.metrics.micro.f1},
                       {"hamming", c.metrics.hamming},
                       {"degenerate_ratios", c.metrics.micro.degenerate_ratios},
                       {"cmin", cmin_to_json(c.metrics.cmin)}};
    }
    if (include_timings) cj["train_seconds"] = c.train_seconds;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  nlohmann::json variance = nlohmann::json::array();
  for (const VarianceCurve& v : r.variance) {
    variance.push_back({{"mode", v.mode}, {"snr_db", v.snr_db}, {"curve", v.curve}});
  }
  j["variance"] = std::move(variance);
  nlohmann::json curves = nlohmann::json::array();
  for (const CurveSeries& s : r.curves) {
    nlohmann::json pts = nlohmann::json::array();
    for (const CurvePoint& p : s.points) {
      pts.push_back({{"size", p.size}, {"train_loss", p.train_loss}, {"test_loss", p.test_loss}});
    }
    curves.push_back({{"model", s.model}, {"points", std::move(pts)}});
  }
  j["curves"] = std::move(curves);
  if (r.grid.has_value()) {
    nlohmann::json cells_j = nlohmann::json::array();
    for (const GridCell& g : r.grid->cells) {
      cells_j.push_back({{"p1", g.p1}, {"p2", g.p2}, {"hamming", g.hamming}});
    }
    j["grid"] = {{"cells", std::move(cells_j)},
                 {"best_p1", r.grid->best_p1},
                 {"best_p2", r.grid->best_p2}};
  }
  if (include_timings) j["total_seconds"] = r.total_seconds;
  return j;
}

// Hash of the canonical report with volatile timing fields stripped.
inline std::string report_hash(const RunReport& r) {
  return hash_hex(fnv1a64(report_to_json(r, false).dump()));
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct SplitData {
  Eigen::MatrixXd x_train;
  Eigen::MatrixXi y_train;
  Eigen::MatrixXd c_train;
  Eigen::MatrixXd x_test;
  Eigen::MatrixXi y_test;
  Eigen::MatrixXd c_test;
};

inline SplitData split_samples(const SampleSet& ss, Eigen::Index n_train) {
  const Eigen::Index n_test = ss.absorbance.rows() - n_train;
  SplitData s;
  s.x_train = ss.absorbance.topRows(n_train);
  s.y_train = ss.labels.topRows(n_train);
  s.c_train = ss.concentrations.topRows(n_train);
  s.x_test = ss.absorbance.bottomRows(n_test);
  s.y_test = ss.labels.bottomRows(n_test);
  s.c_test = ss.concentrations.bottomRows(n_test);
  return s;
}

inline Eigen::Index effective_pca_k(Eigen::Index requested, Eigen::Index n, Eigen::Index p) {
  const Eigen::Index full = std::min(n, p);
  if (requested <= 0) return full;
  return std::min(requested, full);
}

// FNN + threshold net trained on already-transformed features.
struct FnnOtParts {
  FnnModel fnn;
  ThresholdModel tnet;
};

inline FnnModel train_label_fnn(const ExperimentConfig& cfg, const Eigen::MatrixXd& feats,
                                const Eigen::MatrixXi& labels, std::uint64_t seed) {
  FnnLayout layout{feats.cols(), cfg.fnn_hidden, labels.cols(), Head::sigmoid_xent};
  TrainConfig tc = cfg.fnn_train_config;
  tc.seed = seed;
  return fnn_train(layout, feats, labels.cast<double>(), tc).model;
}

inline ThresholdModel train_threshold_net(const ExperimentConfig& cfg, const FnnModel& fnn,
                                          const Eigen::MatrixXd& feats,
                                          const Eigen::MatrixXi& labels, std::uint64_t seed) {
  const Eigen::MatrixXd scores = predict_scores(fnn, feats);
  const Eigen::VectorXd targets = ot_targets(scores, labels);
  TrainConfig tc = cfg.tnet_train_config;
  tc.seed = seed;
  return fit_threshold_net(scores, targets, tc, cfg.tnet_hidden);
}

}  // namespace detail

// Full protocol: synthesize each dataset, fit PCA on its training block,
// train the FNN and threshold net, fit PLS-BR, then evaluate every roster
// model on the held-out block. Failures are contained per cell.
inline RunReport run_pipeline(const ExperimentConfig& config) {
  config.validate();
  const auto run_start = std::chrono::steady_clock::now();

  RunReport report;
  report.config = config_to_json(config);
  report.config_hash_hex = config_hash(config);

  const bool writing = !config.out_dir.empty();
  if (writing) {
    std::filesystem::create_directories(std::filesystem::path(config.out_dir) / "models");
  }

  for (const DatasetManifest& manifest : protocol_manifests(config)) {
    const std::string mode = manifest.mode;
    const double snr = manifest.snr_db;
    const std::uint64_t dseed = manifest.seed;

    auto make_cell = [&](const std::string& model) {
      CellResult cell;
      cell.model = model;
      cell.mode = mode;
      cell.snr_db = snr;
      cell.manifest_seed = dseed;
      return cell;
    };

    // Shared per-dataset stage: synthesis, split, PCA.
    detail::SplitData data;
    PcaModel pca;
    Eigen::MatrixXd train_feats, test_feats;
    try {
      const SampleSet ss = make_dataset(manifest);
      data = detail::split_samples(ss, config.n_train);
      const Eigen::Index k = detail::effective_pca_k(config.pca_components, data.x_train.rows(),
                                                     data.x_train.cols());
      pca = pca_fit(data.x_train, k);
      train_feats = pca_transform(pca, data.x_train);
      test_feats = pca_transform(pca, data.x_test);
      report.variance.push_back(VarianceCurve{mode, snr, explained_variance_curve(pca)});
    } catch (const std::exception& e) {
      for (const std::string& model : config.roster) {
        CellResult cell = make_cell(model);
        cell.error = std::string("dataset stage failed: ") + e.what();
        report.cells.push_back(std::move(cell));
      }
      continue;
    }

    // Shared FNN for the fnn_fixed / fnn_ot cells.
    const bool needs_fnn =
        std::find(config.roster.begin(), config.roster.end(), "fnn_fixed") != config.roster.end() ||
        std::find(config.roster.begin(), config.roster.end(), "fnn_ot") != config.roster.end();
    std::optional<FnnModel> fnn;
    std::optional<ThresholdModel> tnet;
    std::string fnn_error, tnet_error;
    double fnn_seconds = 0.0, tnet_seconds = 0.0;
    if (needs_fnn) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        fnn = detail::train_label_fnn(config, train_feats, data.y_train,
                                      derive_seed(dseed, "fnn"));
        fnn_seconds = detail::seconds_since(t0);
      } catch (const std::exception& e) {
        fnn_error = std::string("fnn training failed: ") + e.what();
      }
    }
    if (fnn && std::find(config.roster.begin(), config.roster.end(), "fnn_ot") !=
                   config.roster.end()) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        tnet = detail::train_threshold_net(config, *fnn, train_feats, data.y_train,
                                           derive_seed(dseed, "tnet"));
        tnet_seconds = detail::seconds_since(t0);
      } catch (const std::exception& e) {
        tnet_error = std::string("threshold net training failed: ") + e.what();
      }
    }

    for (const std::string& model : config.roster) {
      CellResult cell = make_cell(model);
      try {
        Eigen::MatrixXi predictions;
        PipelineModel artifact;
        artifact.kind = model;
        artifact.pca = pca;
        artifact.seed = dseed;
        if (model == "fnn_fixed") {
          if (!fnn) throw std::runtime_error(fnn_error.empty() ? "fnn unavailable" : fnn_error);
          cell.train_seconds = fnn_seconds;
          predictions = predict_labels_fixed(predict_scores(*fnn, test_feats));
          artifact.fnn = fnn;
          artifact.train_config = config.fnn_train_config;
        } else if (model == "fnn_ot") {
          if (!fnn) throw std::runtime_error(fnn_error.empty() ? "fnn unavailable" : fnn_error);
          if (!tnet) throw std::runtime_error(tnet_error.empty() ? "threshold net unavailable"
                                                                 : tnet_error);
          cell.train_seconds = fnn_seconds + tnet_seconds;
          predictions = predict_labels_ot(predict_scores(*fnn, test_feats), *tnet);
          artifact.fnn = fnn;
          artifact.tnet = tnet;
          artifact.train_config = config.fnn_train_config;
        } else if (model == "pls_br") {
          const auto t0 = std::chrono::steady_clock::now();
          const Eigen::MatrixXd& xtr = config.pls_on_raw_pixels ? data.x_train : train_feats;
          const Eigen::MatrixXd& xte = config.pls_on_raw_pixels ? data.x_test : test_feats;
          const Eigen::Index k =
              std::min(config.pls_components, std::min(xtr.rows(), xtr.cols()));
          const auto models = plsbr_fit(xtr, data.y_train, k);
          cell.train_seconds = detail::seconds_since(t0);
          predictions = plsbr_predict(models, xte);
          artifact.pca_features = !config.pls_on_raw_pixels;
          artifact.pls = models;
          artifact.train_config = config.fnn_train_config;
        } else {
          throw std::invalid_argument("unknown roster model: " + model);
        }
        cell.metrics = evaluate_predictions(data.y_test, predictions, data.c_test,
                                            config.cmin_bin_width, config.cmin_recall_floor);
        cell.ok = true;
        if (writing) {
          const std::string name = model + "_" + mode + "_snr" + format_double(snr) + ".json";
          save_model(artifact, (std::filesystem::path(config.out_dir) / "models" / name).string());
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      report.cells.push_back(std::move(cell));
    }
  }

  report.total_seconds = detail::seconds_since(run_start);
  return report;
}

// Trains one FNN-OT per (p1, p2) cell on the same training block and scores
// each cell by validation Hamming loss (single holdout by default, k-fold
// when configured). The reported best cell is the table argmin.
inline GridResult grid_search_dropout(const ExperimentConfig& config,
                                      const std::vector<double>& p1_grid,
                                      const std::vector<double>& p2_grid) {
  config.validate();
  if (p1_grid.empty() || p2_grid.empty()) throw std::invalid_argument("empty dropout grid");
  for (double p : p1_grid) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p1 grid values must lie in (0, 1]");
  }
  for (double p : p2_grid) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p2 grid values must lie in (0, 1]");
  }

  DatasetManifest manifest = protocol_manifests(config).front();
  manifest.n_samples = static_cast<std::size_t>(config.n_train);
  const SampleSet ss = make_dataset(manifest);

  struct Fold {
    Eigen::MatrixXd x_train, x_val;
    Eigen::MatrixXi y_train, y_val;
  };
  std::vector<Fold> folds;
  const Eigen::Index n = ss.absorbance.rows();
  if (config.validation.kfold <= 1) {
    const Eigen::Index n_val =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                      std::llround(config.validation.holdout_fraction *
                                                   static_cast<double>(n))));
    Fold f;
    f.x_train = ss.absorbance.topRows(n - n_val);
    f.y_train = ss.labels.topRows(n - n_val);
    f.x_val = ss.absorbance.bottomRows(n_val);
    f.y_val = ss.labels.bottomRows(n_val);
    folds.push_back(std::move(f));
  } else {
    const int k = config.validation.kfold;
    for (int fold = 0; fold < k; ++fold) {
      const Eigen::Index lo = n * fold / k;
      const Eigen::Index hi = n * (fold + 1) / k;
      Fold f;
      f.x_val = ss.absorbance.middleRows(lo, hi - lo);
      f.y_val = ss.labels.middleRows(lo, hi - lo);
      f.x_train.resize(n - (hi - lo), ss.absorbance.cols());
      f.y_train.resize(n - (hi - lo), ss.labels.cols());
      f.x_train.topRows(lo) = ss.absorbance.topRows(lo);
      f.y_train.topRows(lo) = ss.labels.topRows(lo);
      f.x_train.bottomRows(n - hi) = ss.absorbance.bottomRows(n - hi);
      f.y_train.bottomRows(n - hi) = ss.labels.bottomRows(n - hi);
      folds.push_back(std::move(f));
    }
  }

  GridResult result;
  for (double p1 : p1_grid) {
    for (double p2 : p2_grid) {
      double hamming_sum = 0.0;
      int fold_idx = 0;
      for (const Fold& f : folds) {
        ExperimentConfig cell_cfg = config;
        cell_cfg.fnn_train_config.retention_input = p1;
        cell_cfg.fnn_train_config.retention_hidden = p2;
        const Eigen::Index k = detail::effective_pca_k(config.pca_components, f.x_train.rows(),
                                                       f.x_train.cols());
        const PcaModel pca = pca_fit(f.x_train, k);
        const Eigen::MatrixXd feats = pca_transform(pca, f.x_train);
        const std::string tag = "grid/" + format_double(p1) + "/" + format_double(p2) + "/fold" +
                                std::to_string(fold_idx);
        const FnnModel fnn = detail::train_label_fnn(cell_cfg, feats, f.y_train,
                                                     derive_seed(manifest.seed, tag + "/fnn"));
        const ThresholdModel tnet = detail::train_threshold_net(
            cell_cfg, fnn, feats, f.y_train, derive_seed(manifest.seed, tag + "/tnet"));
        const Eigen::MatrixXd val_feats = pca_transform(pca, f.x_val);
        const Eigen::MatrixXi pred = predict_labels_ot(predict_scores(fnn, val_feats), tnet);
        hamming_sum += hamming_loss(f.y_val, pred);
        ++fold_idx;
      }
      result.cells.push_back(GridCell{p1, p2, hamming_sum / static_cast<double>(folds.size())});
    }
  }
  // Argmin scan in table order; strict less keeps the earliest minimum.
  double best = result.cells.front().hamming;
  result.best_p1 = result.cells.front().p1;
  result.best_p2 = result.cells.front().p2;
  for (const GridCell& c : result.cells) {
    if (c.hamming < best) {
      best = c.hamming;
      result.best_p1 = c.p1;
      result.best_p2 = c.p2;
    }
  }
  return result;
}

// Learning curves for FNN-OT with dropout, FNN-OT without dropout, and
// PLS-BR: per training-prefix size, fresh training and Hamming loss on the
// prefix and on the fixed test set.
inline std::vector<CurveSeries> learning_curve(const ExperimentConfig& config,
                                               const std::vector<int>& train_sizes) {
  config.validate();
  if (train_sizes.empty()) throw std::invalid_argument("no train sizes given");
  for (std::size_t i = 0; i < train_sizes.size(); ++i) {
    if (train_sizes[i] < 10 || train_sizes[i] > config.n_train) {
      throw std::invalid_argument("train sizes must lie in [10, n_train]");
    }
    if (i > 0 && train_sizes[i] <= train_sizes[i - 1]) {
      throw std::invalid_argument("train sizes must be increasing");
    }
  }

  const DatasetManifest manifest = protocol_manifests(config).front();
  const SampleSet ss = make_dataset(manifest);
  const detail::SplitData data = detail::split_samples(ss, config.n_train);

  CurveSeries with_dropout{"fnn_ot", {}};
  CurveSeries without_dropout{"fnn_ot_no_dropout", {}};
  CurveSeries pls_series{"pls_br", {}};

  for (int size : train_sizes) {
    const Eigen::MatrixXd x_sub = data.x_train.topRows(size);
    const Eigen::MatrixXi y_sub = data.y_train.topRows(size);
    const Eigen::Index k = detail::effective_pca_k(config.pca_components, x_sub.rows(),
                                                   x_sub.cols());
    const PcaModel pca = pca_fit(x_sub, k);
    const Eigen::MatrixXd feats = pca_transform(pca, x_sub);
    const Eigen::MatrixXd test_feats = pca_transform(pca, data.x_test);
    const std::string tag = "curve/" + std::to_string(size);

    auto eval_fnn_ot = [&](const ExperimentConfig& cfg, const std::string& sub_tag) {
      const FnnModel fnn = detail::train_label_fnn(cfg, feats, y_sub,
                                                   derive_seed(manifest.seed, sub_tag + "/fnn"));
      const ThresholdModel tnet = detail::train_threshold_net(
          cfg, fnn, feats, y_sub, derive_seed(manifest.seed, sub_tag + "/tnet"));
      const Eigen::MatrixXi train_pred = predict_labels_ot(predict_scores(fnn, feats), tnet);
      const Eigen::MatrixXi test_pred = predict_labels_ot(predict_scores(fnn, test_feats), tnet);
      return CurvePoint{size, hamming_loss(y_sub, train_pred),
                        hamming_loss(data.y_test, test_pred)};
    };

    with_dropout.points.push_back(eval_fnn_ot(config, tag + "/dropout"));

    ExperimentConfig no_drop = config;
    no_drop.fnn_train_config.retention_input = 1.0;
    no_drop.fnn_train_config.retention_hidden = 1.0;
    without_dropout.points.push_back(eval_fnn_ot(no_drop, tag + "/plain"));

    const Eigen::Index pls_k = std::min(config.pls_components, std::min(feats.rows(), feats.cols()));
    const auto pls_models = plsbr_fit(feats, y_sub, pls_k);
    pls_series.points.push_back(CurvePoint{
        size, hamming_loss(y_sub, plsbr_predict(pls_models, feats)),
        hamming_loss(data.y_test, plsbr_predict(pls_models, test_feats))});
  }
  return {with_dropout, without_dropout, pls_series};
}

// report.csv: one row per (model, dataset) cell.
inline void write_report_csv(const RunReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report csv: " + path);
  std::size_t n_gases = 0;
  for (const CellResult& c : r.cells) {
    if (c.ok) n_gases = std::max(n_gases, c.metrics.cmin.per_gas.size());
  }
  out << "config_hash,manifest_seed,mode,snr_db,model,ok,precision,recall,f1,hamming";
  for (std::size_t g = 0; g < n_gases; ++g) out << ",cmin_" << fixture_gas_name(g);
  out << ",error\n";
  for (const CellResult& c : r.cells) {
    out << r.config_hash_hex << ',' << c.manifest_seed << ',' << c.mode << ','
        << format_double(c.snr_db) << ',' << c.model << ',' << (c.ok ? 1 : 0) << ',';
    if (c.ok) {
      out << format_double(c.metrics.micro.precision) << ','
          << format_double(c.metrics.micro.recall) << ',' << format_double(c.metrics.micro.f1)
          << ',' << format_double(c.metrics.hamming);
      for (std::size_t g = 0; g < n_gases; ++g) {
        out << ',';
        if (g < c.metrics.cmin.per_gas.size() && c.metrics.cmin.per_gas[g].has_value()) {
          out << format_double(*c.metrics.cmin.per_gas[g]);
        } else {
          out << "NA";
        }
      }
      out << ",\n";
    } else {
      out << ",,,";
      for (std::size_t g = 0; g < n_gases; ++g) out << ',';
      out << ',' << '"' << c.error << '"' << '\n';
    }
  }
}

inline void write_report(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json in " + dir);
    out << report_to_json(r).dump(2) << '\n';
  }
  write_report_csv(r, (fs::path(dir) / "report.csv").string());
}

// One SVG per figure analog plus the underlying CSV (long format:
// series,x,y). Empty series are skipped with a note.
inline std::vector<std::string> emit_plots(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> notes;

  auto emit = [&](const LineChart& chart, const std::string& stem) {
    LineChart pruned = chart;
    pruned.series.clear();
    for (const Series& s : chart.series) {
      if (s.x.empty()) {
        notes.push_back(stem + ": series '" + s.name + "' empty, skipped");
      } else {
        pruned.series.push_back(s);
      }
    }
    if (pruned.series.empty()) {
      notes.push_back(stem + ": no data, chart skipped");
      return;
    }
    pruned.annotation = "config " + r.config_hash_hex;
    write_line_chart(pruned, (fs::path(dir) / (stem + ".svg")).string());
    std::ofstream csv(fs::path(dir) / (stem + ".csv"));
    csv << "series,x,y\n";
    for (const Series& s : pruned.series) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        csv << s.name << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
      }
    }
  };

  // Micro metric vs SNR, one chart per (metric, mode), series per model.
  std::vector<std::string> modes;
  std::vector<std::string> models;
  for (const CellResult& c : r.cells) {
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) modes.push_back(c.mode);
    if (std::find(models.begin(), models.end(), c.model) == models.end())
      models.push_back(c.model);
  }
  struct MetricSpec {
    const char* name;
    double (*get)(const CellResult&);
  };
  const MetricSpec metric_specs[] = {
      {"precision", [](const CellResult& c) { return c.metrics.micro.precision; }},
      {"recall", [](const CellResult& c) { return c.metrics.micro.recall; }},
      {"f1", [](const CellResult& c) { return c.metrics.micro.f1; }},
      {"hamming", [](const CellResult& c) { return c.metrics.hamming; }},
  };
  for (const std::string& mode : modes) {
    for (const MetricSpec& spec : metric_specs) {
      LineChart chart;
      chart.title = std::string("micro ") + spec.name + " vs SNR (" + mode + ")";
      chart.x_label = "SNR (dB)";
      chart.y_label = spec.name;
      for (const std::string& model : models) {
        Series s{model, {}, {}};
        for (const CellResult& c : r.cells) {
          if (c.ok && c.mode == mode && c.model == model) {
            s.x.push_back(c.snr_db);
            s.y.push_back(spec.get(c));
          }
        }
        chart.series.push_back(std::move(s));
      }
      emit(chart, std::string(spec.name) + "_" + mode);
    }

    // Minimum detectable concentration averaged over gases; "not reached"
    // counts as the 10 uM range ceiling.
    LineChart cmin_chart;
    cmin_chart.title = "mean C_min vs SNR (" + mode + ")";
    cmin_chart.x_label = "SNR (dB)";
    cmin_chart.y_label = "C_min (uM)";
    for (const std::string& model : models) {
      Series s{model, {}, {}};
      for (const CellResult& c : r.cells) {
        if (c.ok && c.mode == mode && c.model == model && !c.metrics.cmin.per_gas.empty()) {
          double sum = 0.0;
          for (const auto& v : c.metrics.cmin.per_gas) sum += v.value_or(10.0);
          s.x.push_back(c.snr_db);
          s.y.push_back(sum / static_cast<double>(c.metrics.cmin.per_gas.size()));
        }
      }
      cmin_chart.series.push_back(std::move(s));
    }
    emit(cmin_chart, "cmin_" + mode);
  }

  // Explained variance curves.
  LineChart variance_chart;
  variance_chart.title = "cumulative explained variance";
  variance_chart.x_label = "components";
  variance_chart.y_label = "explained fraction";
  for (const VarianceCurve& v : r.variance) {
    Series s{v.mode + " snr=" + format_double(v.snr_db), {}, {}};
    for (std::size_t i = 0; i < v.curve.size(); ++i) {
      s.x.push_back(static_cast<double>(i + 1));
      s.y.push_back(v.curve[i]);
    }
    variance_chart.series.push_back(std::move(s));
  }
  if (!r.variance.empty()) emit(variance_chart, "variance");

  // Learning curves: train and test series per model.
  if (!r.curves.empty()) {
    LineChart curve_chart;
    curve_chart.title = "learning curves";
    curve_chart.x_label = "training samples";
    curve_chart.y_label = "Hamming loss";
    for (const CurveSeries& cs : r.curves) {
      Series train_s{cs.model + " train", {}, {}};
      Series test_s{cs.model + " test", {}, {}};
      for (const CurvePoint& p : cs.points) {
        train_s.x.push_back(p.size);
        train_s.y.push_back(p.train_loss);
        test_s.x.push_back(p.size);
        test_s.y.push_back(p.test_loss);
      }
      curve_chart.series.push_back(std::move(train_s));
      curve_chart.series.push_back(std::move(test_s));
    }
    emit(curve_chart, "learning_curves");
  }

  // Dropout grid: one series per p1, Hamming vs p2.
  if (r.grid.has_value()) {
    LineChart grid_chart;
    grid_chart.title = "dropout grid search";
    grid_chart.x_label = "hidden retention p2";
    grid_chart.y_label = "validation Hamming loss";
    std::vector<double> p1_values;
    for (const GridCell& c : r.grid->cells) {
      if (std::find(p1_values.begin(), p1_values.end(), c.p1) == p1_values.end()) {
        p1_values.push_back(c.p1);
      }
    }
    for (double p1 : p1_values) {
      Series s{"p1=" + format_double(p1), {}, {}};
      for (const GridCell& c : r.grid->cells) {
        if (c.p1 == p1) {
          s.x.push_back(c.p2);
          s.y.push_back(c.hamming);
        }
      }
      grid_chart.series.push_back(std::move(s));
    }
    emit(grid_chart, "grid");
  }

  return notes;
}

}  // namespace gasid
