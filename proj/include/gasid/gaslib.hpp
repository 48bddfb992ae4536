#pragma once

// Per-gas effective absorptivity curves on a shared wavelength grid.
// Curves are either generated as deterministic Lorentzian-line fixtures or
// ingested from a cross-section CSV (first column wavelength_um, one column
// per gas). Units are uM^-1 cm^-1, so absorbance = eps * c[uM] * path[cm].

#include <array>
#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gasid/rng.hpp"
#include "gasid/textio.hpp"

namespace gasid {

struct WavelengthGrid {
  std::vector<double> points;  // micrometres, strictly increasing

  static WavelengthGrid uniform(std::size_t count = 1000, double lo = 1.0,
                                double hi = 7.0) {
    if (count < 2) throw std::invalid_argument("wavelength grid needs at least 2 points");
    if (!(lo < hi)) throw std::invalid_argument("wavelength grid range must be increasing");
    WavelengthGrid g;
    g.points.resize(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
      g.points[i] = lo + step * static_cast<double>(i);
    }
    return g;
  }

  std::size_t count() const { return points.size(); }

  void validate() const {
    if (points.size() < 2) throw std::invalid_argument("wavelength grid needs at least 2 points");
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (!(points[i] > points[i - 1])) {
        throw std::invalid_argument("wavelength grid not strictly increasing at index " +
                                    std::to_string(i));
      }
    }
  }
};

struct Gas {
  std::string name;
  Eigen::VectorXd absorptivity;  // aligned to the grid, all entries >= 0
};

inline const std::array<const char*, 9> kDefaultGasNames = {
    "C2H6", "CH4", "CO", "H2O", "HBr", "HCl", "HF", "N2O", "NO"};

struct GasLibrary {
  WavelengthGrid grid;
  std::vector<Gas> gases;

  std::size_t n_gases() const { return gases.size(); }

  void validate() const {
    grid.validate();
    if (gases.empty()) throw std::invalid_argument("gas library has no gases");
    std::set<std::string> seen;
    for (const Gas& g : gases) {
      if (!seen.insert(g.name).second) {
        throw std::invalid_argument("duplicate gas name: " + g.name);
      }
      if (static_cast<std::size_t>(g.absorptivity.size()) != grid.count()) {
        throw std::invalid_argument("absorptivity length mismatch for gas " + g.name);
      }
      bool any_positive = false;
      for (Eigen::Index i = 0; i < g.absorptivity.size(); ++i) {
        const double v = g.absorptivity[i];
        if (v < 0.0) throw std::invalid_argument("negative absorptivity for gas " + g.name);
        if (v > 0.0) any_positive = true;
      }
      if (!any_positive) {
        throw std::invalid_argument("gas " + g.name + " has an all-zero absorptivity curve");
      }
    }
  }

  // Identity hash over names, grid and curve bit patterns.
  std::uint64_t content_hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix_bytes = [&h](const void* data, std::size_t n) {
      const unsigned char* p = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
      }
    };
    mix_bytes(grid.points.data(), grid.points.size() * sizeof(double));
    for (const Gas& g : gases) {
      mix_bytes(g.name.data(), g.name.size());
      mix_bytes(g.absorptivity.data(), static_cast<std::size_t>(g.absorptivity.size()) * sizeof(double));
    }
    return h;
  }
};

inline std::string fixture_gas_name(std::size_t index) {
  if (index < kDefaultGasNames.size()) return kDefaultGasNames[index];
  return "GAS" + std::to_string(index + 1);
}

// Deterministic stand-in for measured single-gas cross sections. Each gas is
// a sum of 5-20 Lorentzian lines with centres inside the grid range, scaled
// so the peak absorbance at 10 uM over a 10 cm path lands in [0.1, 2.0].
inline GasLibrary generate_fixture_library(std::uint64_t seed, std::size_t n_gases,
                                           const WavelengthGrid& grid) {
  if (n_gases == 0) throw std::invalid_argument("n_gases must be at least 1");
  grid.validate();

  GasLibrary lib;
  lib.grid = grid;
  lib.gases.reserve(n_gases);
  const double lo = grid.points.front();
  const double hi = grid.points.back();
  const std::size_t n_px = grid.count();

  for (std::size_t g = 0; g < n_gases; ++g) {
    Rng rng(derive_seed(seed, "gas/" + std::to_string(g)));
    const std::size_t n_lines = 5 + static_cast<std::size_t>(rng.below(16));
    std::vector<double> center(n_lines), width(n_lines), amp(n_lines);
    // Narrow lines: a few pixels wide on the default grid, as line spectra
    // downsample to, so low-SNR noise cannot be averaged away.
    for (std::size_t k = 0; k < n_lines; ++k) {
      center[k] = rng.uniform(lo, hi);
      width[k] = rng.uniform(0.004, 0.025);
      amp[k] = rng.uniform(0.2, 1.0);
    }
    const double peak_absorbance = rng.uniform(0.1, 0.15);

    Eigen::VectorXd curve = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_px));
    for (std::size_t i = 0; i < n_px; ++i) {
      const double lam = grid.points[i];
      double v = 0.0;
      for (std::size_t k = 0; k < n_lines; ++k) {
        const double d = lam - center[k];
        v += amp[k] * width[k] * width[k] / (d * d + width[k] * width[k]);
      }
      curve[static_cast<Eigen::Index>(i)] = v;
    }
    const double peak = curve.maxCoeff();
    // eps_max * 10 uM * 10 cm == peak_absorbance
    curve *= peak_absorbance / (100.0 * peak);
    lib.gases.push_back(Gas{fixture_gas_name(g), std::move(curve)});
  }
  lib.validate();
  return lib;
}

// Cross-section CSV. Row numbers in error messages are 1-based physical file
// lines (the header is line 1); columns are 1-based.
inline GasLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cross-section file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "wavelength_um") {
    throw std::runtime_error(path + ": malformed header, expected 'wavelength_um,<gas>,...'");
  }
  const std::size_t n_cols = header.size();

  GasLibrary lib;
  for (std::size_t c = 1; c < n_cols; ++c) {
    std::string name(trim(header[c]));
    if (name.empty()) {
      throw std::runtime_error(path + ": empty gas name in header column " + std::to_string(c + 1));
    }
    lib.gases.push_back(Gas{std::move(name), Eigen::VectorXd()});
  }

  std::vector<std::vector<double>> columns(n_cols);
  std::size_t row = 1;  // header consumed
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != n_cols) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + ": expected " +
                               std::to_string(n_cols) + " columns, got " +
                               std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v;
      if (!try_parse_double(cells[c], v)) {
        throw std::runtime_error(path + ": row " + std::to_string(row) + ", column " +
                                 std::to_string(c + 1) + ": not a number");
      }
      if (c > 0 && v < 0.0) {
        throw std::runtime_error(path + ": row " + std::to_string(row) + ", column " +
                                 std::to_string(c + 1) + ": negative absorptivity");
      }
      columns[c].push_back(v);
    }
    const auto& wl = columns[0];
    if (wl.size() >= 2 && !(wl[wl.size() - 1] > wl[wl.size() - 2])) {
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": wavelengths not strictly increasing");
    }
  }
  if (columns[0].size() < 2) {
    throw std::runtime_error(path + ": needs at least 2 grid rows");
  }

  lib.grid.points = std::move(columns[0]);
  const Eigen::Index n_px = static_cast<Eigen::Index>(lib.grid.count());
  for (std::size_t c = 1; c < n_cols; ++c) {
    Eigen::VectorXd curve(n_px);
    for (Eigen::Index i = 0; i < n_px; ++i) curve[i] = columns[c][static_cast<std::size_t>(i)];
    lib.gases[c - 1].absorptivity = std::move(curve);
  }
  lib.validate();
  return lib;
}

inline void save_library(const GasLibrary& lib, const std::string& path) {
  lib.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cross-section file: " + path);
  out << "wavelength_um";
  for (const Gas& g : lib.gases) out << ',' << g.name;
  out << '\n';
  for (std::size_t i = 0; i < lib.grid.count(); ++i) {
    out << format_double(lib.grid.points[i]);
    for (const Gas& g : lib.gases) {
      out << ',' << format_double(g.absorptivity[static_cast<Eigen::Index>(i)]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing cross-section file: " + path);
}

}  // namespace gasid
