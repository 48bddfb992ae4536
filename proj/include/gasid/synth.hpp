#pragma once

// Dataset synthesis: concentration sampling (independent or block-correlated
// through a Gaussian copula), 50% presence masking, and Beer-Lambert spectra
// with Gaussian intensity noise at a preset SNR.
//
// SNR convention: noise is added to transmitted intensity relative to a unit
// source, sigma = 10^(-snr_db/20). Noisy intensity is floored at 1e-6 before
// the log; the noise-free path returns clean absorbance exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "gasid/gaslib.hpp"
#include "gasid/rng.hpp"
#include "gasid/textio.hpp"

namespace gasid {

constexpr double kMaxConcentrationUm = 10.0;
constexpr double kIntensityFloor = 1e-6;

inline Eigen::MatrixXd sample_concentrations_independent(std::uint64_t seed, std::size_t n,
                                                         std::size_t n_gases) {
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  if (n_gases == 0) throw std::invalid_argument("n_gases must be at least 1");
  Rng rng(seed);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_gases));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      c(i, j) = rng.uniform(0.0, kMaxConcentrationUm);
    }
  }
  return c;
}

struct CovarianceSpec {
  Eigen::MatrixXd sigma;                    // 9x9, symmetric PSD
  std::array<std::array<int, 3>, 3> blocks;  // partition of the 9 gases

  void validate() const {
    if (sigma.rows() != sigma.cols()) throw std::invalid_argument("covariance must be square");
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    const double max_ev = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, max_ev)) {
      throw std::invalid_argument("covariance not positive semi-definite");
    }
  }
};

// L has 3x3 blocks of U(0,1) entries with diagonal blocks scaled by 100;
// Sigma = L L^T is then PSD with strong within-block coupling.
inline CovarianceSpec build_block_covariance(std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd l(9, 9);
  for (Eigen::Index i = 0; i < 9; ++i) {
    for (Eigen::Index j = 0; j < 9; ++j) {
      const bool diag_block = (i / 3) == (j / 3);
      l(i, j) = rng.uniform01() * (diag_block ? 100.0 : 1.0);
    }
  }
  CovarianceSpec spec;
  spec.sigma = l * l.transpose();
  for (int b = 0; b < 3; ++b) {
    spec.blocks[static_cast<std::size_t>(b)] = {3 * b, 3 * b + 1, 3 * b + 2};
  }
  return spec;
}

// Zero-mean multivariate normal rows with covariance spec.sigma, realized by
// the symmetric eigenfactor A = V diag(sqrt(lambda)) applied to iid normals.
inline Eigen::MatrixXd sample_mvn(std::uint64_t seed, const CovarianceSpec& spec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  const Eigen::Index d = spec.sigma.rows();
  if (d == 0 || spec.sigma.cols() != d) throw std::invalid_argument("bad covariance shape");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.sigma);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("covariance factorization failed");
  }
  Eigen::VectorXd evals = es.eigenvalues();
  const double max_ev = std::max(evals.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (evals[i] < -1e-9 * std::max(1.0, max_ev)) {
      throw std::runtime_error("covariance factorization failed: matrix is indefinite");
    }
    evals[i] = std::max(evals[i], 0.0);
  }
  const Eigen::MatrixXd factor = es.eigenvectors() * evals.cwiseSqrt().asDiagonal();

  Rng rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    x.row(i) = (factor * z).transpose();
  }
  return x;
}

// In-sample empirical CDF per column with the strict indicator 1(x^j < x):
// distinct inputs map onto the grid {0, 1/n, ..., (n-1)/n}; ties share a value.
inline Eigen::MatrixXd ecdf_transform(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw std::invalid_argument("ecdf_transform needs at least 2 rows");
  Eigen::MatrixXd y(x.rows(), x.cols());
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  std::vector<double> sorted(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) sorted[static_cast<std::size_t>(i)] = x(i, j);
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), x(i, j));
      y(i, j) = static_cast<double>(it - sorted.begin()) * inv_n;
    }
  }
  return y;
}

// Block covariance -> multivariate normal -> per-column empirical CDF,
// scaled to [0, 10] uM. Within-subset correlations survive the transform.
inline Eigen::MatrixXd sample_concentrations_correlated(std::uint64_t seed, std::size_t n) {
  if (n < 2) throw std::invalid_argument("correlated sampling needs at least 2 samples");
  const CovarianceSpec spec = build_block_covariance(derive_seed(seed, "cov"));
  const Eigen::MatrixXd x = sample_mvn(derive_seed(seed, "mvn"), spec, n);
  return kMaxConcentrationUm * ecdf_transform(x);
}

// Zeroes each (sample, gas) entry independently with probability 0.5.
// The label is 1 iff the concentration is strictly positive afterwards.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXi> apply_presence_mask(
    const Eigen::MatrixXd& c, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd masked = c;
  Eigen::MatrixXi labels(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (rng.bernoulli(0.5)) masked(i, j) = 0.0;
      labels(i, j) = masked(i, j) > 0.0 ? 1 : 0;
    }
  }
  return {std::move(masked), std::move(labels)};
}

struct DatasetManifest {
  int format_version = 1;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::string mode = "independent";  // independent | correlated
  double snr_db = std::numeric_limits<double>::infinity();
  double path_cm = 10.0;
  // Fixture library recipe plus its content hash for verification.
  std::uint64_t library_seed = 7;
  std::size_t n_gases = 9;
  std::size_t grid_points = 1000;
  double grid_lo = 1.0;
  double grid_hi = 7.0;
  std::string library_hash;

  void validate() const {
    if (format_version != 1) throw std::runtime_error("unsupported manifest format_version");
    if (n_samples == 0) throw std::invalid_argument("manifest n_samples must be positive");
    if (mode != "independent" && mode != "correlated") {
      throw std::invalid_argument("manifest mode must be independent or correlated");
    }
    if (!(path_cm > 0.0)) throw std::invalid_argument("path length must be positive");
  }
};

struct SampleSet {
  Eigen::MatrixXd absorbance;      // n_samples x n_pixels
  Eigen::MatrixXi labels;          // n_samples x n_gases
  Eigen::MatrixXd concentrations;  // n_samples x n_gases, uM
  DatasetManifest manifest;

  std::size_t n_samples() const { return static_cast<std::size_t>(absorbance.rows()); }
};

// Beer-Lambert synthesis. Per pixel: A = sum_g eps_g * c_g * path, I = 10^-A,
// I' = I + N(0, sigma^2) with sigma = 10^(-snr_db/20), floored, then
// A_rec = -log10(I'). Rows draw from independent substreams of `seed`, so
// per-row parallel synthesis cannot change the result.
inline SampleSet synthesize_spectra(const GasLibrary& lib, const Eigen::MatrixXd& c,
                                    const Eigen::MatrixXi& labels, double path_cm,
                                    double snr_db, std::uint64_t seed) {
  lib.validate();
  if (static_cast<std::size_t>(c.cols()) != lib.n_gases()) {
    throw std::invalid_argument("concentration column count does not match gas count");
  }
  if (labels.rows() != c.rows() || labels.cols() != c.cols()) {
    throw std::invalid_argument("label matrix shape does not match concentrations");
  }
  if (!(path_cm > 0.0)) throw std::invalid_argument("path length must be positive");

  const Eigen::Index n = c.rows();
  const Eigen::Index n_px = static_cast<Eigen::Index>(lib.grid.count());
  Eigen::MatrixXd eps(static_cast<Eigen::Index>(lib.n_gases()), n_px);
  for (std::size_t g = 0; g < lib.n_gases(); ++g) {
    eps.row(static_cast<Eigen::Index>(g)) = lib.gases[g].absorptivity.transpose();
  }

  SampleSet out;
  out.absorbance.noalias() = c * eps;
  out.absorbance *= path_cm;

  if (std::isfinite(snr_db)) {
    const double sigma = std::pow(10.0, -snr_db / 20.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      Rng row_rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      for (Eigen::Index p = 0; p < n_px; ++p) {
        const double intensity = std::pow(10.0, -out.absorbance(i, p));
        const double noisy = std::max(intensity + sigma * row_rng.normal(), kIntensityFloor);
        out.absorbance(i, p) = -std::log10(noisy);
      }
    }
  }

  out.labels = labels;
  out.concentrations = c;
  out.manifest.seed = seed;
  out.manifest.n_samples = static_cast<std::size_t>(n);
  out.manifest.snr_db = snr_db;
  out.manifest.path_cm = path_cm;
  out.manifest.n_gases = lib.n_gases();
  out.manifest.grid_points = lib.grid.count();
  out.manifest.grid_lo = lib.grid.points.front();
  out.manifest.grid_hi = lib.grid.points.back();
  out.manifest.library_hash = hash_hex(lib.content_hash());
  return out;
}

// Canonical regeneration path: a manifest pins the library recipe, the
// concentration mode and every substream, so the result is bit-identical
// across runs.
inline SampleSet make_dataset(const DatasetManifest& m) {
  m.validate();
  const WavelengthGrid grid = WavelengthGrid::uniform(m.grid_points, m.grid_lo, m.grid_hi);
  const GasLibrary lib = generate_fixture_library(m.library_seed, m.n_gases, grid);
  if (!m.library_hash.empty() && m.library_hash != hash_hex(lib.content_hash())) {
    throw std::runtime_error("manifest library hash mismatch");
  }

  Eigen::MatrixXd conc;
  if (m.mode == "independent") {
    conc = sample_concentrations_independent(derive_seed(m.seed, "conc"), m.n_samples, m.n_gases);
  } else {
    if (m.n_gases != 9) {
      throw std::invalid_argument("correlated mode is defined for the 9-gas roster");
    }
    conc = sample_concentrations_correlated(derive_seed(m.seed, "conc"), m.n_samples);
  }
  auto [masked, labels] = apply_presence_mask(conc, derive_seed(m.seed, "mask"));

  SampleSet ss = synthesize_spectra(lib, masked, labels, m.path_cm, m.snr_db,
                                    derive_seed(m.seed, "noise"));
  ss.manifest = m;
  ss.manifest.library_hash = hash_hex(lib.content_hash());
  return ss;
}

}  // namespace gasid
