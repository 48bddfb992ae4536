// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. End-to-end criteria share the pipeline runs listed in
// main(); every threshold is pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "gasid/gasid.hpp"

using namespace gasid;

namespace {

struct Checker {
  int failed = 0;
  void check(int id, const std::string& desc, bool ok, const std::string& detail) {
    std::printf("%s criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, desc.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- C1 ----

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index p) {
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

Eigen::MatrixXd random_bits(Rng& rng, Eigen::Index n, Eigen::Index p) {
  Eigen::MatrixXd y(n, p);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return y;
}

double loss_of(const FnnModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
               const DropoutMasks& masks) {
  const auto out = fnn_forward(model, x, &masks).output;
  return model.layout.head == Head::sigmoid_xent ? loss_xent(out, t) : loss_mse(out, t);
}

// Worst relative gradient error against central finite differences across a
// random (layout, batch, mask) triple.
double gradient_case_error(Rng& rng, Head head) {
  FnnModel model;
  Eigen::MatrixXd x, targets;
  DropoutMasks masks;
  for (;;) {
    FnnLayout layout;
    layout.n_in = 2 + static_cast<Eigen::Index>(rng.below(5));
    layout.n_hidden = 2 + static_cast<Eigen::Index>(rng.below(4));
    layout.n_out = 1 + static_cast<Eigen::Index>(rng.below(4));
    layout.head = head;
    model = fnn_init(layout, rng.next_u64());
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(6));
    x = random_matrix(rng, n, layout.n_in);
    targets = head == Head::sigmoid_xent ? random_bits(rng, n, layout.n_out)
                                         : random_matrix(rng, n, layout.n_out);
    masks = make_dropout_masks(rng, layout, 0.8, 0.6);
    const auto cache = detail::forward_pass(model, x, &masks);
    if (cache.z1.cwiseAbs().minCoeff() > 1e-3) break;  // keep FD away from the ReLU kink
  }
  const FnnGradients analytic = fnn_gradients(model, x, targets, &masks);

  const double h = 1e-5;
  FnnGradients fd;
  auto diff = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = loss_of(model, x, targets, masks);
    param = saved - h;
    const double down = loss_of(model, x, targets, masks);
    param = saved;
    return (up - down) / (2.0 * h);
  };
  fd.w1.resize(model.w1.rows(), model.w1.cols());
  for (Eigen::Index i = 0; i < model.w1.size(); ++i) fd.w1.data()[i] = diff(model.w1.data()[i]);
  fd.b1.resize(model.b1.size());
  for (Eigen::Index i = 0; i < model.b1.size(); ++i) fd.b1[i] = diff(model.b1[i]);
  fd.w2.resize(model.w2.rows(), model.w2.cols());
  for (Eigen::Index i = 0; i < model.w2.size(); ++i) fd.w2.data()[i] = diff(model.w2.data()[i]);
  fd.b2.resize(model.b2.size());
  for (Eigen::Index i = 0; i < model.b2.size(); ++i) fd.b2[i] = diff(model.b2[i]);

  double scale = 1.0;
  scale = std::max({scale, fd.w1.cwiseAbs().maxCoeff(), fd.w2.cwiseAbs().maxCoeff(),
                    fd.b1.cwiseAbs().maxCoeff(), fd.b2.cwiseAbs().maxCoeff()});
  double err = (analytic.w1 - fd.w1).cwiseAbs().maxCoeff();
  err = std::max(err, (analytic.b1 - fd.b1).cwiseAbs().maxCoeff());
  err = std::max(err, (analytic.w2 - fd.w2).cwiseAbs().maxCoeff());
  err = std::max(err, (analytic.b2 - fd.b2).cwiseAbs().maxCoeff());
  return err / scale;
}

// ------------------------------------------------------------- C2/C3 ----

std::pair<double, double> brute_force_ot(const Eigen::VectorXd& s, const Eigen::VectorXi& y) {
  std::vector<double> sorted(s.data(), s.data() + s.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    candidates.push_back((sorted[i] + sorted[i + 1]) / 2.0);
  }
  candidates.push_back(1.0);
  double best_t = 0.0, best_f1 = -1.0;
  for (double t : candidates) {
    int tp = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const int pred = s[i] > t ? 1 : 0;
      if (pred == 1 && y[i] == 1) ++tp;
      if (pred == 1 && y[i] == 0) ++fp;
      if (pred == 0 && y[i] == 1) ++fn;
    }
    const double f1 = (2 * tp + fp + fn) == 0 ? 1.0 : 2.0 * tp / double(2 * tp + fp + fn);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return {best_t, best_f1};
}

// -------------------------------------------------------------- helpers --

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

const CellResult* find_cell(const RunReport& r, const std::string& model, const std::string& mode,
                            double snr) {
  for (const CellResult& c : r.cells) {
    if (c.model == model && c.mode == mode && c.snr_db == snr) return &c;
  }
  return nullptr;
}

std::string fmt(const char* format, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

std::string fmt1(const char* format, double a) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

double mean_cmin(const CminResult& c) {
  double sum = 0.0;
  for (const auto& v : c.per_gas) sum += v.value_or(10.0);  // not reached -> range ceiling
  return sum / static_cast<double>(c.per_gas.size());
}

}  // namespace

int main() {
  Checker out;
  const auto suite_start = std::chrono::steady_clock::now();

  // 1. Analytic vs finite-difference gradients, 100 random triples.
  {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Head head = trial % 2 == 0 ? Head::sigmoid_xent : Head::linear_mse;
      worst = std::max(worst, gradient_case_error(rng, head));
    }
    out.check(1, "gradient correctness (100 nets, both heads, rel err < 1e-4)", worst < 1e-4,
              fmt("worst rel err %.3g in %.1fs", worst, seconds_since(t0)));
  }

  // 2-3. OT equals exhaustive search; OT F1 dominates fixed 0.5.
  {
    Rng rng(1002);
    bool oracle_match = true;
    bool dominates = true;
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd s(9);
      for (Eigen::Index i = 0; i < 9; ++i) s[i] = rng.uniform01();
      Eigen::VectorXi y(9);
      for (Eigen::Index i = 0; i < 9; ++i) y[i] = rng.bernoulli(0.5) ? 1 : 0;
      const auto got = optimal_threshold(s, y);
      const auto expect = brute_force_ot(s, y);
      if (got.first != expect.first || got.second != expect.second) oracle_match = false;
      Eigen::VectorXi fixed(9);
      for (Eigen::Index i = 0; i < 9; ++i) fixed[i] = s[i] > 0.5 ? 1 : 0;
      if (got.second < sample_f1(y, fixed)) dominates = false;
    }
    out.check(2, "optimal threshold matches exhaustive candidate search on 1000 pairs",
              oracle_match, "");
    out.check(3, "per-sample F1 at the OT threshold >= F1 at fixed 0.5", dominates, "");
  }

  // 4. Empirical-CDF transform retains normal correlations within 0.05.
  {
    bool ok = true;
    std::string detail;
    for (const double rho : {0.1, 0.5, 0.9}) {
      CovarianceSpec spec;
      spec.sigma = Eigen::MatrixXd::Identity(2, 2);
      spec.sigma(0, 1) = spec.sigma(1, 0) = rho;
      const Eigen::MatrixXd x = sample_mvn(1004, spec, 10000);
      const Eigen::MatrixXd y = ecdf_transform(x);
      const double r = pearson(y.col(0), y.col(1));
      if (std::abs(r - rho) > 0.05) ok = false;
      detail += fmt("rho %.1f -> %.4f; ", rho, r);
    }
    out.check(4, "correlation retention through the uniform transform (+-0.05)", ok, detail);
  }

  // 5. Block-correlated concentrations: within > 0.5, cross < 0.2.
  {
    const Eigen::MatrixXd c = sample_concentrations_correlated(1005, 10000);
    double within = 0.0, cross = 0.0;
    int n_within = 0, n_cross = 0;
    for (Eigen::Index i = 0; i < 9; ++i) {
      for (Eigen::Index j = i + 1; j < 9; ++j) {
        const double r = pearson(c.col(i), c.col(j));
        if (i / 3 == j / 3) {
          within += r;
          ++n_within;
        } else {
          cross += r;
          ++n_cross;
        }
      }
    }
    within /= n_within;
    cross /= n_cross;
    out.check(5, "block correlation structure (within > 0.5, cross < 0.2)",
              within > 0.5 && cross < 0.2, fmt("within %.3f cross %.3f", within, cross));
  }

  // 6. Full-component PLS equals OLS within 1e-6 on 20 random problems.
  {
    Rng rng(1006);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd x = random_matrix(rng, 50, 8);
      const Eigen::MatrixXd y = x * random_matrix(rng, 8, 1) + 0.3 * random_matrix(rng, 50, 1);
      const PlsModel model = nipals_fit(x, y, 8);
      const Eigen::MatrixXd test = random_matrix(rng, 10, 8);

      const Eigen::RowVectorXd x_mean = x.colwise().mean();
      const Eigen::RowVectorXd y_mean = y.colwise().mean();
      const Eigen::MatrixXd xc = x.rowwise() - x_mean;
      const Eigen::MatrixXd yc = y.rowwise() - y_mean;
      const Eigen::MatrixXd beta = (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc);
      const Eigen::MatrixXd ols = ((test.rowwise() - x_mean) * beta).rowwise() + y_mean;
      worst = std::max(worst, (pls_predict(model, test) - ols).cwiseAbs().maxCoeff());
    }
    out.check(6, "k = rank PLS equals OLS on 20 random problems (1e-6)", worst < 1e-6,
              fmt1("worst abs diff %.3g", worst));
  }

  // Shared end-to-end runs for criteria 7-12.
  ExperimentConfig base;
  base.modes = {"independent"};
  base.snr_db_list = {0.0, 10.0, 30.0, 50.0};
  base.n_train = 10000;
  base.n_test = 2500;
  base.master_seed = 7701;

  std::printf("info: running independent-mode pipeline (4 SNRs x 3 models)...\n");
  std::fflush(stdout);
  auto t_runs = std::chrono::steady_clock::now();
  const RunReport indep = run_pipeline(base);
  std::printf("info: independent pipeline done in %.1fs\n", seconds_since(t_runs));
  std::fflush(stdout);

  ExperimentConfig corr_cfg = base;
  corr_cfg.modes = {"correlated"};
  corr_cfg.snr_db_list = {10.0};
  corr_cfg.roster = {"fnn_ot", "pls_br"};
  t_runs = std::chrono::steady_clock::now();
  const RunReport corr = run_pipeline(corr_cfg);
  std::printf("info: correlated pipeline done in %.1fs\n", seconds_since(t_runs));
  std::fflush(stdout);

  ExperimentConfig nodrop_cfg = base;
  nodrop_cfg.snr_db_list = {30.0};
  nodrop_cfg.roster = {"fnn_ot"};
  nodrop_cfg.fnn_train_config.retention_input = 1.0;
  nodrop_cfg.fnn_train_config.retention_hidden = 1.0;
  t_runs = std::chrono::steady_clock::now();
  const RunReport nodrop = run_pipeline(nodrop_cfg);
  std::printf("info: no-dropout pipeline done in %.1fs\n", seconds_since(t_runs));
  std::fflush(stdout);

  for (const CellResult& c : indep.cells) {
    if (!c.ok) std::printf("info: cell %s/%s/%g failed: %s\n", c.model.c_str(), c.mode.c_str(),
                           c.snr_db, c.error.c_str());
  }

  // 7. High SNR: FNN-OT reaches 0.85 micro-F1 and beats PLS-BR.
  {
    const CellResult* ot = find_cell(indep, "fnn_ot", "independent", 50.0);
    const CellResult* pls = find_cell(indep, "pls_br", "independent", 50.0);
    const bool ok = ot && pls && ot->ok && pls->ok && ot->metrics.micro.f1 >= 0.85 &&
                    ot->metrics.micro.f1 >= pls->metrics.micro.f1;
    out.check(7, "SNR 50 dB: micro-F1(FNN-OT) >= 0.85 and >= micro-F1(PLS-BR)", ok,
              ot && pls && ot->ok && pls->ok
                  ? fmt("fnn_ot %.4f pls_br %.4f", ot->metrics.micro.f1, pls->metrics.micro.f1)
                  : "missing cells");
  }

  // 8. Noise floor: every model near random-guess micro-F1.
  {
    bool ok = true;
    std::string detail;
    for (const char* model : {"fnn_fixed", "fnn_ot", "pls_br"}) {
      const CellResult* c = find_cell(indep, model, "independent", 0.0);
      if (!c || !c->ok) {
        ok = false;
        detail += std::string(model) + " missing; ";
        continue;
      }
      const double f1 = c->metrics.micro.f1;
      if (f1 < 0.40 || f1 > 0.60) ok = false;
      detail += std::string(model) + fmt1(" %.4f; ", f1);
    }
    out.check(8, "SNR 0 dB: every model's micro-F1 in [0.40, 0.60]", ok, detail);
  }

  // 9. Precision/recall asymmetry and the OT recall gain at SNR 30 dB.
  {
    const CellResult* fixed = find_cell(indep, "fnn_fixed", "independent", 30.0);
    const CellResult* ot = find_cell(indep, "fnn_ot", "independent", 30.0);
    const bool ok = fixed && ot && fixed->ok && ot->ok &&
                    fixed->metrics.micro.precision >= fixed->metrics.micro.recall &&
                    ot->metrics.micro.recall >= fixed->metrics.micro.recall;
    out.check(9, "SNR 30 dB: precision >= recall for fixed FNN; OT recall >= fixed recall", ok,
              fixed && ot && fixed->ok && ot->ok
                  ? fmt("fixed P %.4f R %.4f", fixed->metrics.micro.precision,
                        fixed->metrics.micro.recall) +
                        fmt1(", ot R %.4f", ot->metrics.micro.recall)
                  : "missing cells");
  }

  // 10. Dropout benefit on test Hamming loss at SNR 30 dB.
  {
    const CellResult* with_drop = find_cell(indep, "fnn_ot", "independent", 30.0);
    const CellResult* without = find_cell(nodrop, "fnn_ot", "independent", 30.0);
    const bool ok = with_drop && without && with_drop->ok && without->ok &&
                    with_drop->metrics.hamming < without->metrics.hamming;
    out.check(10, "SNR 30 dB: test Hamming with p=(0.95,0.2) < with p=(1,1)", ok,
              with_drop && without && with_drop->ok && without->ok
                  ? fmt("dropout %.4f plain %.4f", with_drop->metrics.hamming,
                        without->metrics.hamming)
                  : "missing cells");
  }

  // 11. Correlated low-SNR advantage at 10 dB.
  {
    const CellResult* ot_corr = find_cell(corr, "fnn_ot", "correlated", 10.0);
    const CellResult* pls_corr = find_cell(corr, "pls_br", "correlated", 10.0);
    const CellResult* ot_indep = find_cell(indep, "fnn_ot", "independent", 10.0);
    const bool ok = ot_corr && pls_corr && ot_indep && ot_corr->ok && pls_corr->ok &&
                    ot_indep->ok &&
                    ot_corr->metrics.micro.f1 >= ot_indep->metrics.micro.f1 - 0.02 &&
                    ot_corr->metrics.micro.f1 >= pls_corr->metrics.micro.f1;
    out.check(11, "SNR 10 dB: F1(OT, corr) >= F1(OT, indep) - 0.02 and >= F1(PLS-BR, corr)", ok,
              ot_corr && pls_corr && ot_indep && ot_corr->ok && pls_corr->ok && ot_indep->ok
                  ? fmt("corr %.4f indep %.4f", ot_corr->metrics.micro.f1,
                        ot_indep->metrics.micro.f1) +
                        fmt1(", pls corr %.4f", pls_corr->metrics.micro.f1)
                  : "missing cells");
  }

  // 12. C_min trends: non-increasing in SNR per gas and model; FNN-OT at or
  //     below fixed FNN on average at 30 dB.
  {
    bool monotone = true;
    std::string detail;
    for (const char* model : {"fnn_fixed", "fnn_ot", "pls_br"}) {
      const CellResult* c10 = find_cell(indep, model, "independent", 10.0);
      const CellResult* c30 = find_cell(indep, model, "independent", 30.0);
      const CellResult* c50 = find_cell(indep, model, "independent", 50.0);
      if (!c10 || !c30 || !c50 || !c10->ok || !c30->ok || !c50->ok) {
        monotone = false;
        continue;
      }
      for (std::size_t g = 0; g < 9; ++g) {
        const double v10 = c10->metrics.cmin.per_gas[g].value_or(
            std::numeric_limits<double>::infinity());
        const double v30 = c30->metrics.cmin.per_gas[g].value_or(
            std::numeric_limits<double>::infinity());
        const double v50 = c50->metrics.cmin.per_gas[g].value_or(
            std::numeric_limits<double>::infinity());
        if (!(v50 <= v30 && v30 <= v10)) {
          monotone = false;
          detail += std::string(model) + fmt(" gas %g: %.1f", double(g), v10) +
                    fmt("/%.1f/%.1f ", v30, v50);
        }
      }
    }
    const CellResult* ot30 = find_cell(indep, "fnn_ot", "independent", 30.0);
    const CellResult* fixed30 = find_cell(indep, "fnn_fixed", "independent", 30.0);
    bool ot_better = false;
    if (ot30 && fixed30 && ot30->ok && fixed30->ok) {
      ot_better = mean_cmin(ot30->metrics.cmin) <= mean_cmin(fixed30->metrics.cmin);
      detail += fmt("mean cmin ot %.3f fixed %.3f", mean_cmin(ot30->metrics.cmin),
                    mean_cmin(fixed30->metrics.cmin));
    }
    out.check(12, "C_min non-increasing in SNR per gas/model; OT <= fixed on average at 30 dB",
              monotone && ot_better, detail);
  }

  // 13. Determinism of the full pipeline.
  {
    ExperimentConfig toy;
    toy.modes = {"independent"};
    toy.snr_db_list = {20.0};
    toy.n_train = 300;
    toy.n_test = 100;
    toy.master_seed = 99;
    toy.grid_points = 150;
    toy.pca_components = 40;
    toy.fnn_hidden = 32;
    toy.tnet_hidden = 16;
    toy.pls_components = 10;
    toy.fnn_train_config.epochs = 8;
    toy.tnet_train_config.epochs = 8;
    const std::string h1 = report_hash(run_pipeline(toy));
    const std::string h2 = report_hash(run_pipeline(toy));
    out.check(13, "identical configs produce hash-identical run reports", h1 == h2,
              h1 == h2 ? h1 : h1 + " vs " + h2);
  }

  std::printf("acceptance suite finished in %.1fs: %s\n", seconds_since(suite_start),
              out.failed == 0 ? "all criteria passed" : std::to_string(out.failed).append(
                                                            " criteria failed").c_str());
  return out.failed == 0 ? 0 : 1;
}
