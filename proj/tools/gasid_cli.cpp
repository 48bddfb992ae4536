// Command-line front end: dataset synthesis, single-model training,
// evaluation of stored models, the full experiment protocol, dropout grid
// search and learning curves. A JSON config file may supply any experiment
// option; explicit flags override file values. Failures exit nonzero with a
// machine-readable error JSON on stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gasid/gasid.hpp"

namespace {

using namespace gasid;
namespace fs = std::filesystem;

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return std::numeric_limits<double>::infinity();
  double v;
  if (!try_parse_double(s, v)) throw CLI::ValidationError("--snr", "expected a number or 'inf'");
  return v;
}

// Options shared by experiment/grid/curve; flags set on the command line
// override values read from --config.
struct ConfigCli {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> snr_list;
  std::vector<std::string> modes;
  std::vector<std::string> roster;
  int n_train = 0;
  int n_test = 0;
  std::uint64_t seed = 0;
  int pca_k = -1;
  int hidden = 0;
  int tnet_hidden = 0;
  int pls_k = 0;
  int epochs = 0;
  int batch = 0;
  double lr = 0.0;
  double p1 = -1.0;
  double p2 = -1.0;
  bool pls_raw = false;

  CLI::Option* opt_out = nullptr;
  CLI::Option* opt_snr = nullptr;
  CLI::Option* opt_modes = nullptr;
  CLI::Option* opt_roster = nullptr;
  CLI::Option* opt_n_train = nullptr;
  CLI::Option* opt_n_test = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_pca = nullptr;
  CLI::Option* opt_hidden = nullptr;
  CLI::Option* opt_tnet_hidden = nullptr;
  CLI::Option* opt_pls_k = nullptr;
  CLI::Option* opt_epochs = nullptr;
  CLI::Option* opt_batch = nullptr;
  CLI::Option* opt_lr = nullptr;
  CLI::Option* opt_p1 = nullptr;
  CLI::Option* opt_p2 = nullptr;
  CLI::Option* opt_pls_raw = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file supplying any option");
    opt_out = cmd->add_option("--out", out_dir, "output directory");
    opt_snr = cmd->add_option("--snr", snr_list, "SNR list in dB ('inf' allowed)");
    opt_modes = cmd->add_option("--mode", modes, "correlation modes (independent|correlated)");
    opt_roster = cmd->add_option("--model", roster, "model roster (fnn_fixed|fnn_ot|pls_br)");
    opt_n_train = cmd->add_option("--n-train", n_train, "training samples per dataset");
    opt_n_test = cmd->add_option("--n-test", n_test, "test samples per dataset");
    opt_seed = cmd->add_option("--seed", seed, "master seed");
    opt_pca = cmd->add_option("--pca-k", pca_k, "PCA components (0 = full rank)");
    opt_hidden = cmd->add_option("--hidden", hidden, "FNN hidden width");
    opt_tnet_hidden = cmd->add_option("--tnet-hidden", tnet_hidden, "threshold net hidden width");
    opt_pls_k = cmd->add_option("--pls-k", pls_k, "PLS components");
    opt_epochs = cmd->add_option("--epochs", epochs, "training epochs");
    opt_batch = cmd->add_option("--batch", batch, "mini-batch size");
    opt_lr = cmd->add_option("--lr", lr, "Adam learning rate");
    opt_p1 = cmd->add_option("--p1", p1, "input retention probability");
    opt_p2 = cmd->add_option("--p2", p2, "hidden retention probability");
    opt_pls_raw = cmd->add_flag("--pls-raw", pls_raw, "feed PLS-BR raw pixels instead of PCs");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config file: " + config_path);
      nlohmann::json j;
      in >> j;
      c = config_from_json(j);
    }
    if (opt_out->count()) c.out_dir = out_dir;
    if (opt_snr->count()) {
      c.snr_db_list.clear();
      for (const std::string& s : snr_list) c.snr_db_list.push_back(parse_snr(s));
    }
    if (opt_modes->count()) c.modes = modes;
    if (opt_roster->count()) c.roster = roster;
    if (opt_n_train->count()) c.n_train = n_train;
    if (opt_n_test->count()) c.n_test = n_test;
    if (opt_seed->count()) c.master_seed = seed;
    if (opt_pca->count()) c.pca_components = pca_k;
    if (opt_hidden->count()) c.fnn_hidden = hidden;
    if (opt_tnet_hidden->count()) c.tnet_hidden = tnet_hidden;
    if (opt_pls_k->count()) c.pls_components = pls_k;
    if (opt_epochs->count()) {
      c.fnn_train_config.epochs = epochs;
      c.tnet_train_config.epochs = epochs;
    }
    if (opt_batch->count()) {
      c.fnn_train_config.batch_size = batch;
      c.tnet_train_config.batch_size = batch;
    }
    if (opt_lr->count()) {
      c.fnn_train_config.learning_rate = lr;
      c.tnet_train_config.learning_rate = lr;
    }
    if (opt_p1->count()) c.fnn_train_config.retention_input = p1;
    if (opt_p2->count()) c.fnn_train_config.retention_hidden = p2;
    if (opt_pls_raw->count()) c.pls_on_raw_pixels = pls_raw;
    c.validate();
    return c;
  }
};

nlohmann::json metrics_to_json(const MetricsReport& m) {
  return nlohmann::json{{"precision", m.micro.precision},
                        {"recall", m.micro.recall},
                        {"f1", m.micro.f1},
                        {"hamming", m.hamming},
                        {"degenerate_ratios", m.micro.degenerate_ratios},
                        {"cmin", cmin_to_json(m.cmin)},
                        {"notes", m.cmin.notes}};
}

void print_cells(const RunReport& r) {
  for (const CellResult& c : r.cells) {
    if (c.ok) {
      std::printf("%-12s %-11s snr=%-5g f1=%.4f precision=%.4f recall=%.4f hamming=%.4f\n",
                  c.model.c_str(), c.mode.c_str(), c.snr_db, c.metrics.micro.f1,
                  c.metrics.micro.precision, c.metrics.micro.recall, c.metrics.hamming);
    } else {
      std::printf("%-12s %-11s snr=%-5g FAILED: %s\n", c.model.c_str(), c.mode.c_str(), c.snr_db,
                  c.error.c_str());
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"multi-gas spectra synthesis and multi-label gas identification"};
  app.require_subcommand(1);

  // synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "synthesize a dataset (data.csv + manifest.json)");
  std::string synth_out, synth_mode = "independent", synth_snr = "inf";
  std::uint64_t synth_seed = 1, synth_lib_seed = 7;
  std::size_t synth_n = 1000, synth_gases = 9, synth_grid = 1000;
  double synth_lo = 1.0, synth_hi = 7.0, synth_path = 10.0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--mode", synth_mode, "independent|correlated");
  synth->add_option("--snr", synth_snr, "SNR in dB or 'inf'");
  synth->add_option("--n", synth_n, "sample count");
  synth->add_option("--seed", synth_seed, "dataset seed");
  synth->add_option("--gases", synth_gases, "number of gases");
  synth->add_option("--grid-points", synth_grid, "wavelength grid points");
  synth->add_option("--grid-lo", synth_lo, "grid start (um)");
  synth->add_option("--grid-hi", synth_hi, "grid end (um)");
  synth->add_option("--path-cm", synth_path, "absorption path length (cm)");
  synth->add_option("--library-seed", synth_lib_seed, "fixture library seed");
  synth->callback([&] {
    DatasetManifest m;
    m.seed = synth_seed;
    m.n_samples = synth_n;
    m.mode = synth_mode;
    m.snr_db = parse_snr(synth_snr);
    m.path_cm = synth_path;
    m.library_seed = synth_lib_seed;
    m.n_gases = synth_gases;
    m.grid_points = synth_grid;
    m.grid_lo = synth_lo;
    m.grid_hi = synth_hi;
    const SampleSet ss = make_dataset(m);
    write_dataset(ss, synth_out);
    std::printf("wrote %zu samples to %s (library %s)\n", ss.n_samples(), synth_out.c_str(),
                ss.manifest.library_hash.c_str());
  });

  // train -------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train one model on a dataset directory");
  std::string train_data, train_model, train_out;
  int train_pca_k = 0, train_hidden = 64, train_tnet_hidden = 64, train_pls_k = 20;
  int train_epochs = 50, train_batch = 128;
  double train_lr = 1e-3, train_p1 = 0.95, train_p2 = 0.2;
  std::uint64_t train_seed = 1;
  bool train_pls_raw = false;
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--model", train_model, "fnn_fixed|fnn_ot|pls_br")->required();
  train->add_option("--out", train_out, "model output file")->required();
  train->add_option("--pca-k", train_pca_k, "PCA components (0 = full rank)");
  train->add_option("--hidden", train_hidden, "FNN hidden width");
  train->add_option("--tnet-hidden", train_tnet_hidden, "threshold net hidden width");
  train->add_option("--pls-k", train_pls_k, "PLS components");
  train->add_option("--epochs", train_epochs, "training epochs");
  train->add_option("--batch", train_batch, "mini-batch size");
  train->add_option("--lr", train_lr, "Adam learning rate");
  train->add_option("--p1", train_p1, "input retention probability");
  train->add_option("--p2", train_p2, "hidden retention probability");
  train->add_option("--seed", train_seed, "training seed");
  train->add_flag("--pls-raw", train_pls_raw, "feed PLS-BR raw pixels instead of PCs");
  train->callback([&] {
    if (train_model != "fnn_fixed" && train_model != "fnn_ot" && train_model != "pls_br") {
      throw std::runtime_error("unknown model kind: " + train_model);
    }
    const SampleSet ss = load_dataset(train_data);
    const Eigen::Index n = ss.absorbance.rows();
    const Eigen::Index k = train_pca_k <= 0
                               ? std::min(n, ss.absorbance.cols())
                               : std::min<Eigen::Index>(train_pca_k,
                                                        std::min(n, ss.absorbance.cols()));
    PipelineModel artifact;
    artifact.kind = train_model;
    artifact.seed = train_seed;
    artifact.pca = pca_fit(ss.absorbance, k);
    const Eigen::MatrixXd feats = pca_transform(artifact.pca, ss.absorbance);

    TrainConfig tc;
    tc.retention_input = train_p1;
    tc.retention_hidden = train_p2;
    tc.learning_rate = train_lr;
    tc.batch_size = train_batch;
    tc.epochs = train_epochs;
    artifact.train_config = tc;

    if (train_model == "pls_br") {
      const Eigen::MatrixXd& x = train_pls_raw ? ss.absorbance : feats;
      artifact.pca_features = !train_pls_raw;
      const Eigen::Index pk = std::min<Eigen::Index>(train_pls_k, std::min(x.rows(), x.cols()));
      artifact.pls = plsbr_fit(x, ss.labels, pk);
    } else {
      TrainConfig fc = tc;
      fc.seed = derive_seed(train_seed, "fnn");
      FnnLayout layout{feats.cols(), train_hidden, ss.labels.cols(), Head::sigmoid_xent};
      artifact.fnn = fnn_train(layout, feats, ss.labels.cast<double>(), fc).model;
      if (train_model == "fnn_ot") {
        const Eigen::MatrixXd scores = predict_scores(*artifact.fnn, feats);
        TrainConfig oc = tc;
        oc.retention_input = 1.0;
        oc.retention_hidden = 1.0;
        oc.seed = derive_seed(train_seed, "tnet");
        artifact.tnet =
            fit_threshold_net(scores, ot_targets(scores, ss.labels), oc, train_tnet_hidden);
      }
    }
    save_model(artifact, train_out);
    std::printf("trained %s on %lld samples, wrote %s\n", train_model.c_str(),
                static_cast<long long>(n), train_out.c_str());
  });

  // eval --------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate a stored model on a dataset directory");
  std::string eval_model, eval_data, eval_out;
  double eval_bin = 0.5, eval_floor = 0.9;
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--out", eval_out, "metrics output file (default stdout)");
  eval->add_option("--cmin-bin-width", eval_bin, "C_min bin width (uM)");
  eval->add_option("--cmin-recall-floor", eval_floor, "C_min recall floor");
  eval->callback([&] {
    const PipelineModel model = load_model(eval_model);
    const SampleSet ss = load_dataset(eval_data);
    const Eigen::MatrixXi pred = pipeline_predict(model, ss.absorbance);
    const MetricsReport report =
        evaluate_predictions(ss.labels, pred, ss.concentrations, eval_bin, eval_floor);
    const std::string text = metrics_to_json(report).dump(2);
    if (eval_out.empty()) {
      std::printf("%s\n", text.c_str());
    } else {
      std::ofstream out(eval_out);
      if (!out) throw std::runtime_error("cannot write " + eval_out);
      out << text << '\n';
    }
  });

  // experiment ----------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "run the full dataset x model protocol");
  ConfigCli exp_cli;
  exp_cli.attach(experiment);
  experiment->callback([&] {
    ExperimentConfig c = exp_cli.resolve();
    if (c.out_dir.empty()) c.out_dir = "runs/experiment";
    const RunReport report = run_pipeline(c);
    write_report(report, c.out_dir);
    for (const std::string& note : emit_plots(report, c.out_dir)) {
      std::printf("note: %s\n", note.c_str());
    }
    print_cells(report);
    std::printf("report hash %s, artifacts in %s\n", report_hash(report).c_str(),
                c.out_dir.c_str());
  });

  // grid ----------------------------------------------------------------
  auto* grid = app.add_subcommand("grid", "dropout retention grid search");
  ConfigCli grid_cli;
  grid_cli.attach(grid);
  std::vector<double> grid_p1{0.8, 0.9, 0.95, 1.0};
  std::vector<double> grid_p2{0.2, 0.5, 0.8, 1.0};
  grid->add_option("--p1-grid", grid_p1, "input retention grid");
  grid->add_option("--p2-grid", grid_p2, "hidden retention grid");
  grid->callback([&] {
    ExperimentConfig c = grid_cli.resolve();
    if (c.out_dir.empty()) c.out_dir = "runs/grid";
    RunReport report;
    report.config = config_to_json(c);
    report.config_hash_hex = config_hash(c);
    report.grid = grid_search_dropout(c, grid_p1, grid_p2);
    write_report(report, c.out_dir);
    for (const std::string& note : emit_plots(report, c.out_dir)) {
      std::printf("note: %s\n", note.c_str());
    }
    for (const GridCell& cell : report.grid->cells) {
      std::printf("p1=%-5g p2=%-5g hamming=%.4f\n", cell.p1, cell.p2, cell.hamming);
    }
    std::printf("best cell: p1=%g p2=%g\n", report.grid->best_p1, report.grid->best_p2);
  });

  // curve ---------------------------------------------------------------
  auto* curve = app.add_subcommand("curve", "learning curves over training prefix sizes");
  ConfigCli curve_cli;
  curve_cli.attach(curve);
  std::vector<int> curve_sizes;
  curve->add_option("--sizes", curve_sizes, "increasing training sizes")->required();
  curve->callback([&] {
    ExperimentConfig c = curve_cli.resolve();
    if (c.out_dir.empty()) c.out_dir = "runs/curve";
    RunReport report;
    report.config = config_to_json(c);
    report.config_hash_hex = config_hash(c);
    report.curves = learning_curve(c, curve_sizes);
    write_report(report, c.out_dir);
    for (const std::string& note : emit_plots(report, c.out_dir)) {
      std::printf("note: %s\n", note.c_str());
    }
    for (const CurveSeries& s : report.curves) {
      for (const CurvePoint& p : s.points) {
        std::printf("%-22s size=%-6d train=%.4f test=%.4f\n", s.model.c_str(), p.size,
                    p.train_loss, p.test_loss);
      }
    }
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"message", e.what()}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}
