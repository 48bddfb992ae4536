#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gasid/harness.hpp"

using namespace gasid;
namespace fs = std::filesystem;

namespace {

// Small desk-scale config that keeps the full pipeline in the sub-second
// regime per cell.
ExperimentConfig toy_config() {
  ExperimentConfig c;
  c.snr_db_list = {30.0};
  c.modes = {"independent"};
  c.n_train = 200;
  c.n_test = 80;
  c.master_seed = 11;
  c.grid_points = 120;
  c.pca_components = 40;
  c.fnn_hidden = 32;
  c.tnet_hidden = 16;
  c.pls_components = 10;
  c.fnn_train_config.epochs = 30;
  c.fnn_train_config.batch_size = 32;
  c.tnet_train_config.epochs = 30;
  c.tnet_train_config.batch_size = 32;
  return c;
}

}  // namespace

TEST_CASE("protocol manifests cover the snr x mode grid") {
  ExperimentConfig c;
  c.n_train = 100;
  c.n_test = 50;
  const auto manifests = protocol_manifests(c);
  REQUIRE(manifests.size() == 12);
  for (const auto& m : manifests) {
    REQUIRE(m.n_samples == 150);
  }
  // Distinct seeds per dataset; all regenerable.
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    for (std::size_t j = i + 1; j < manifests.size(); ++j) {
      REQUIRE(manifests[i].seed != manifests[j].seed);
    }
  }
}

TEST_CASE("pipeline smoke run emits one report per roster cell") {
  ExperimentConfig c = toy_config();
  c.roster = {"fnn_fixed"};
  const RunReport r = run_pipeline(c);
  REQUIRE(r.cells.size() == 1);
  REQUIRE(r.cells[0].ok);
  REQUIRE(r.cells[0].metrics.micro.f1 > 0.0);
  REQUIRE(r.variance.size() == 1);
  REQUIRE_FALSE(r.config_hash_hex.empty());
}

TEST_CASE("identical configs reproduce the report hash; cells are isolated") {
  ExperimentConfig c = toy_config();
  c.roster = {"fnn_fixed", "fnn_ot", "pls_br", "bogus_model"};
  const RunReport a = run_pipeline(c);
  const RunReport b = run_pipeline(c);
  REQUIRE(report_hash(a) == report_hash(b));

  REQUIRE(a.cells.size() == 4);
  int ok_count = 0;
  for (const CellResult& cell : a.cells) {
    if (cell.ok) ++ok_count;
  }
  REQUIRE(ok_count == 3);
  REQUIRE_FALSE(a.cells[3].ok);
  REQUIRE(a.cells[3].error.find("bogus_model") != std::string::npos);

  // A different master seed changes the report.
  ExperimentConfig c2 = c;
  c2.master_seed = 12;
  REQUIRE(report_hash(run_pipeline(c2)) != report_hash(a));
}

TEST_CASE("run artifacts are written with hashes") {
  const fs::path dir = fs::temp_directory_path() / "gasid_run";
  fs::remove_all(dir);
  ExperimentConfig c = toy_config();
  c.roster = {"fnn_ot"};
  c.out_dir = dir.string();
  const RunReport r = run_pipeline(c);
  write_report(r, c.out_dir);
  const auto notes = emit_plots(r, c.out_dir);

  REQUIRE(fs::exists(dir / "report.json"));
  REQUIRE(fs::exists(dir / "report.csv"));
  REQUIRE(fs::exists(dir / "models" / "fnn_ot_independent_snr30.json"));
  REQUIRE(fs::exists(dir / "f1_independent.svg"));
  REQUIRE(fs::exists(dir / "f1_independent.csv"));
  REQUIRE(fs::exists(dir / "variance.svg"));

  // Every output embeds the config hash.
  nlohmann::json j;
  std::ifstream(dir / "report.json") >> j;
  REQUIRE(j.at("config_hash") == r.config_hash_hex);
  std::ifstream svg_in(dir / "f1_independent.svg");
  std::string svg((std::istreambuf_iterator<char>(svg_in)), std::istreambuf_iterator<char>());
  REQUIRE(svg.find(r.config_hash_hex) != std::string::npos);

  // CSV row counts match the series lengths (header + one row per point).
  std::ifstream csv_in(dir / "f1_independent.csv");
  std::string line;
  int rows = 0;
  while (std::getline(csv_in, line)) ++rows;
  REQUIRE(rows == 2);  // header + 1 snr point for the single model

  // Axis ranges cover the data extents recomputed from the CSV.
  std::ifstream csv2(dir / "variance.csv");
  std::getline(csv2, line);  // header
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  while (std::getline(csv2, line)) {
    const auto cells = split_csv_line(line);
    double x, y;
    REQUIRE(try_parse_double(cells[1], x));
    REQUIRE(try_parse_double(cells[2], y));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  std::ifstream var_in(dir / "variance.svg");
  std::string var_svg((std::istreambuf_iterator<char>(var_in)), std::istreambuf_iterator<char>());
  auto attr = [&](const std::string& name) {
    const auto pos = var_svg.find(name + "=\"");
    REQUIRE(pos != std::string::npos);
    const auto start = pos + name.size() + 2;
    const auto end = var_svg.find('"', start);
    return std::stod(var_svg.substr(start, end - start));
  };
  REQUIRE(attr("data-xmin") <= xmin);
  REQUIRE(attr("data-xmax") >= xmax);
  REQUIRE(attr("data-ymin") <= ymin);
  REQUIRE(attr("data-ymax") >= ymax);

  fs::remove_all(dir);
}

TEST_CASE("grid search reduces to plain training on the unit grid") {
  ExperimentConfig c = toy_config();
  const GridResult g = grid_search_dropout(c, {1.0}, {1.0});
  REQUIRE(g.cells.size() == 1);
  REQUIRE(g.best_p1 == 1.0);
  REQUIRE(g.best_p2 == 1.0);
  REQUIRE(g.cells[0].hamming >= 0.0);
  REQUIRE(g.cells[0].hamming <= 1.0);
}

TEST_CASE("grid search argmin matches a manual scan of the table") {
  ExperimentConfig c = toy_config();
  c.fnn_train_config.epochs = 15;
  const GridResult g = grid_search_dropout(c, {0.95, 1.0}, {0.2, 1.0});
  REQUIRE(g.cells.size() == 4);
  double best = g.cells.front().hamming;
  double bp1 = g.cells.front().p1, bp2 = g.cells.front().p2;
  for (const GridCell& cell : g.cells) {
    if (cell.hamming < best) {
      best = cell.hamming;
      bp1 = cell.p1;
      bp2 = cell.p2;
    }
  }
  REQUIRE(g.best_p1 == bp1);
  REQUIRE(g.best_p2 == bp2);

  // The argmin cell cannot lose to the no-dropout cell it includes.
  for (const GridCell& cell : g.cells) {
    if (cell.p1 == 1.0 && cell.p2 == 1.0) REQUIRE(best <= cell.hamming);
  }
}

TEST_CASE("learning curve series cover every size and show overfit shrinking") {
  ExperimentConfig c = toy_config();
  c.n_train = 400;
  c.n_test = 150;
  c.fnn_hidden = 64;
  c.fnn_train_config.epochs = 600;
  c.fnn_train_config.batch_size = 16;
  c.tnet_train_config.epochs = 60;
  const std::vector<int> sizes{50, 400};
  const auto curves = learning_curve(c, sizes);
  REQUIRE(curves.size() == 3);
  for (const CurveSeries& s : curves) {
    REQUIRE(s.points.size() == sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      REQUIRE(s.points[i].size == sizes[static_cast<std::size_t>(i)]);
    }
  }

  // Without dropout the training loss collapses near zero at small sizes
  // while the test loss stays clearly above it.
  const CurveSeries& plain = curves[1];
  REQUIRE(plain.model == "fnn_ot_no_dropout");
  REQUIRE(plain.points[0].train_loss < 0.05);
  REQUIRE(plain.points[0].test_loss > plain.points[0].train_loss);

  // At the largest size, dropout narrows the train/test gap.
  const CurveSeries& dropout = curves[0];
  const double gap_dropout =
      std::abs(dropout.points[1].test_loss - dropout.points[1].train_loss);
  const double gap_plain = std::abs(plain.points[1].test_loss - plain.points[1].train_loss);
  REQUIRE(gap_dropout < gap_plain);

  REQUIRE_THROWS_AS(learning_curve(c, {50, 40}), std::invalid_argument);
  REQUIRE_THROWS_AS(learning_curve(c, {50, 100000}), std::invalid_argument);
}

TEST_CASE("config json round-trip preserves the hash") {
  ExperimentConfig c = toy_config();
  c.roster = {"fnn_ot", "pls_br"};
  c.validation.kfold = 3;
  const ExperimentConfig back = config_from_json(config_to_json(c));
  REQUIRE(config_hash(back) == config_hash(c));
  REQUIRE(back.validation.kfold == 3);

  ExperimentConfig bad = c;
  bad.n_train = 5;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}
