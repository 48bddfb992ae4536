#include <catch2/catch_amalgamated.hpp>

#include "gasid/metrics.hpp"
#include "gasid/rng.hpp"

using namespace gasid;

TEST_CASE("confusion counts") {
  Eigen::MatrixXi y(3, 3), y_hat(3, 3);
  y << 1, 0, 1, 0, 1, 0, 1, 1, 0;

  SECTION("perfect prediction has no errors") {
    const ConfusionCounts c = confusion_counts(y, y);
    REQUIRE(c.pooled.fp == 0);
    REQUIRE(c.pooled.fn == 0);
    REQUIRE(c.pooled.tp == 5);
    REQUIRE(c.pooled.tn == 4);
  }
  SECTION("complement prediction has no hits") {
    y_hat = Eigen::MatrixXi::Ones(3, 3) - y;
    const ConfusionCounts c = confusion_counts(y, y_hat);
    REQUIRE(c.pooled.tp == 0);
    REQUIRE(c.pooled.tn == 0);
    REQUIRE(c.pooled.fp == 4);
    REQUIRE(c.pooled.fn == 5);
  }
  SECTION("hand tally with one FP and one FN") {
    y_hat = y;
    y_hat(0, 1) = 1;  // FP
    y_hat(0, 0) = 0;  // FN
    const ConfusionCounts c = confusion_counts(y, y_hat);
    REQUIRE(c.pooled.tp == 4);
    REQUIRE(c.pooled.fp == 1);
    REQUIRE(c.pooled.fn == 1);
    REQUIRE(c.pooled.tn == 3);
    REQUIRE(c.per_label[0].fn == 1);
    REQUIRE(c.per_label[1].fp == 1);
    // Per label, the four cases cover every sample.
    for (const auto& cell : c.per_label) {
      REQUIRE(cell.tp + cell.fp + cell.fn + cell.tn == 3);
    }
  }
  SECTION("shape mismatch rejected") {
    REQUIRE_THROWS_AS(confusion_counts(y, Eigen::MatrixXi::Zero(2, 3)), std::invalid_argument);
  }
}

TEST_CASE("micro metrics") {
  SECTION("perfect prediction") {
    Eigen::MatrixXi y(2, 2);
    y << 1, 0, 0, 1;
    const MicroMetrics m = micro_metrics(confusion_counts(y, y));
    REQUIRE(m.precision == 1.0);
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.f1 == 1.0);
  }
  SECTION("pooled TP=3, FP=6, FN=0") {
    ConfusionCounts c;
    c.pooled = ConfusionCell{3, 6, 0, 0};
    const MicroMetrics m = micro_metrics(c);
    REQUIRE(m.precision == Catch::Approx(1.0 / 3.0));
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.f1 == Catch::Approx(0.5));
  }
  SECTION("0/0 ratios default to 1 and are counted") {
    ConfusionCounts c;
    c.pooled = ConfusionCell{0, 0, 0, 10};
    const MicroMetrics m = micro_metrics(c);
    REQUIRE(m.precision == 1.0);
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.degenerate_ratios == 2);
  }
  SECTION("random guessing on balanced labels scores near 0.5") {
    Rng rng(42);
    const Eigen::Index n = 10000, l = 9;
    Eigen::MatrixXi y(n, l), y_hat(n, l);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < l; ++j) {
        y(i, j) = rng.bernoulli(0.5) ? 1 : 0;
        y_hat(i, j) = rng.bernoulli(0.5) ? 1 : 0;
      }
    }
    const MicroMetrics m = micro_metrics(confusion_counts(y, y_hat));
    REQUIRE(std::abs(m.f1 - 0.5) < 0.03);
  }
  SECTION("f1 is the harmonic mean, between precision and recall") {
    ConfusionCounts c;
    c.pooled = ConfusionCell{7, 2, 5, 6};
    const MicroMetrics m = micro_metrics(c);
    REQUIRE(m.f1 == Catch::Approx(2.0 * m.precision * m.recall / (m.precision + m.recall)));
    REQUIRE(m.f1 >= std::min(m.precision, m.recall));
    REQUIRE(m.f1 <= std::max(m.precision, m.recall));
  }
}

TEST_CASE("hamming loss") {
  Eigen::MatrixXi y(100, 9);
  Rng rng(1);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.bernoulli(0.5) ? 1 : 0;

  REQUIRE(hamming_loss(y, y) == 0.0);
  REQUIRE(hamming_loss(y, Eigen::MatrixXi::Ones(100, 9) - y) == 1.0);

  Eigen::MatrixXi one_wrong = y;
  one_wrong(17, 3) = 1 - one_wrong(17, 3);
  REQUIRE(hamming_loss(y, one_wrong) == Catch::Approx(1.0 / 900.0));

  // Symmetric, and equal to 1 - slot accuracy.
  Eigen::MatrixXi other(100, 9);
  for (Eigen::Index i = 0; i < other.size(); ++i) other.data()[i] = rng.bernoulli(0.5) ? 1 : 0;
  REQUIRE(hamming_loss(y, other) == hamming_loss(other, y));
}

TEST_CASE("minimum detectable concentration") {
  Rng rng(2);
  const Eigen::Index n = 4000;
  Eigen::MatrixXi y(n, 2);
  Eigen::MatrixXd c(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      y(i, j) = rng.bernoulli(0.5) ? 1 : 0;
      c(i, j) = y(i, j) == 1 ? rng.uniform(0.0, 10.0) : 0.0;
    }
  }

  SECTION("perfect detector reaches the lowest bin edge") {
    const CminResult r = min_detectable_concentration(y, y, c);
    REQUIRE(r.per_gas[0].has_value());
    REQUIRE(*r.per_gas[0] == 0.0);
  }
  SECTION("detector that fires exactly above 2.0 uM") {
    Eigen::MatrixXi y_hat(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) y_hat(i, j) = c(i, j) > 2.0 ? 1 : 0;
    }
    const CminResult r = min_detectable_concentration(y, y_hat, c);
    REQUIRE(*r.per_gas[0] == 2.0);
    REQUIRE(*r.per_gas[1] == 2.0);
  }
  SECTION("silent detector never reaches the floor") {
    const CminResult r = min_detectable_concentration(y, Eigen::MatrixXi::Zero(n, 2), c);
    REQUIRE_FALSE(r.per_gas[0].has_value());
  }
  SECTION("c_min does not increase when the floor is lowered") {
    Eigen::MatrixXi y_hat(n, 2);
    Rng noise(3);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        // Detection probability grows with concentration.
        y_hat(i, j) = (y(i, j) == 1 && noise.uniform01() < c(i, j) / 10.0) ? 1 : 0;
      }
    }
    const CminResult strict = min_detectable_concentration(y, y_hat, c, 0.5, 0.9);
    const CminResult loose = min_detectable_concentration(y, y_hat, c, 0.5, 0.5);
    for (int g = 0; g < 2; ++g) {
      const double s = strict.per_gas[static_cast<std::size_t>(g)].value_or(10.0);
      const double l = loose.per_gas[static_cast<std::size_t>(g)].value_or(10.0);
      REQUIRE(l <= s);
    }
  }
  SECTION("empty bins are skipped with a note") {
    Eigen::MatrixXi yy(4, 1), yh(4, 1);
    yy << 1, 1, 1, 1;
    yh << 1, 1, 1, 1;
    Eigen::MatrixXd cc(4, 1);
    cc << 0.2, 0.3, 9.8, 9.9;  // middle bins empty
    const CminResult r = min_detectable_concentration(yy, yh, cc);
    REQUIRE(*r.per_gas[0] == 0.0);
    REQUIRE_FALSE(r.notes.empty());
  }
}
