#pragma once

// Dataset persistence: data.csv (sample id, concentrations, labels, pixel
// absorbances) plus manifest.json. Doubles are written in shortest
// round-trip form, so a load reproduces the matrices bit-exactly.

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasid/synth.hpp"
#include "gasid/textio.hpp"

namespace gasid {

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["format_version"] = m.format_version;
  j["seed"] = m.seed;
  j["n_samples"] = m.n_samples;
  j["mode"] = m.mode;
  if (std::isfinite(m.snr_db)) {
    j["snr_db"] = m.snr_db;
  } else {
    j["snr_db"] = "inf";
  }
  j["path_cm"] = m.path_cm;
  j["library_seed"] = m.library_seed;
  j["n_gases"] = m.n_gases;
  j["grid_points"] = m.grid_points;
  j["grid_lo"] = m.grid_lo;
  j["grid_hi"] = m.grid_hi;
  j["library_hash"] = m.library_hash;
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1) {
    throw std::runtime_error("unsupported manifest format_version " +
                             std::to_string(m.format_version));
  }
  m.seed = j.at("seed").get<std::uint64_t>();
  m.n_samples = j.at("n_samples").get<std::size_t>();
  m.mode = j.at("mode").get<std::string>();
  const auto& snr = j.at("snr_db");
  m.snr_db = snr.is_string() ? std::numeric_limits<double>::infinity() : snr.get<double>();
  m.path_cm = j.at("path_cm").get<double>();
  m.library_seed = j.at("library_seed").get<std::uint64_t>();
  m.n_gases = j.at("n_gases").get<std::size_t>();
  m.grid_points = j.at("grid_points").get<std::size_t>();
  m.grid_lo = j.at("grid_lo").get<double>();
  m.grid_hi = j.at("grid_hi").get<double>();
  m.library_hash = j.value("library_hash", std::string{});
  m.validate();
  return m;
}

// Writes data.csv + manifest.json into `dir`.
inline void write_dataset(const SampleSet& ss, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest.json in " + dir);
    out << manifest_to_json(ss.manifest).dump(2) << '\n';
  }

  std::ofstream out(fs::path(dir) / "data.csv");
  if (!out) throw std::runtime_error("cannot write data.csv in " + dir);
  const Eigen::Index n_gases = ss.concentrations.cols();
  const Eigen::Index n_px = ss.absorbance.cols();

  out << "# format_version 1\n";
  out << "sample_id";
  for (Eigen::Index g = 0; g < n_gases; ++g) {
    out << ",conc_" << fixture_gas_name(static_cast<std::size_t>(g));
  }
  for (Eigen::Index g = 0; g < n_gases; ++g) {
    out << ",label_" << fixture_gas_name(static_cast<std::size_t>(g));
  }
  for (Eigen::Index p = 0; p < n_px; ++p) out << ",px_" << p;
  out << '\n';

  for (Eigen::Index i = 0; i < ss.absorbance.rows(); ++i) {
    out << i;
    for (Eigen::Index g = 0; g < n_gases; ++g) out << ',' << format_double(ss.concentrations(i, g));
    for (Eigen::Index g = 0; g < n_gases; ++g) out << ',' << ss.labels(i, g);
    for (Eigen::Index p = 0; p < n_px; ++p) out << ',' << format_double(ss.absorbance(i, p));
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing data.csv in " + dir);
}

inline SampleSet load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  SampleSet ss;
  {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("cannot open manifest.json in " + dir);
    nlohmann::json j;
    in >> j;
    ss.manifest = manifest_from_json(j);
  }

  std::ifstream in(fs::path(dir) / "data.csv");
  if (!in) throw std::runtime_error("cannot open data.csv in " + dir);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(dir + "/data.csv: empty file");
  if (line.rfind("# format_version", 0) == 0) {
    if (trim(line) != "# format_version 1") {
      throw std::runtime_error(dir + "/data.csv: unsupported format_version line: " + line);
    }
    if (!std::getline(in, line)) throw std::runtime_error(dir + "/data.csv: missing header");
  }
  const auto header = split_csv_line(line);
  const std::size_t n_gases = ss.manifest.n_gases;
  const std::size_t expected_cols = 1 + 2 * n_gases + ss.manifest.grid_points;
  if (header.size() != expected_cols) {
    throw std::runtime_error(dir + "/data.csv: header has " + std::to_string(header.size()) +
                             " columns, manifest implies " + std::to_string(expected_cols));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(ss.manifest.n_samples);
  const Eigen::Index g_count = static_cast<Eigen::Index>(n_gases);
  const Eigen::Index n_px = static_cast<Eigen::Index>(ss.manifest.grid_points);
  ss.concentrations.resize(n, g_count);
  ss.labels.resize(n, g_count);
  ss.absorbance.resize(n, n_px);

  Eigen::Index row = 0;
  std::size_t file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    if (trim(line).empty()) continue;
    if (row >= n) throw std::runtime_error(dir + "/data.csv: more rows than the manifest declares");
    const auto cells = split_csv_line(line);
    if (cells.size() != expected_cols) {
      throw std::runtime_error(dir + "/data.csv: row " + std::to_string(file_line) +
                               ": wrong column count");
    }
    std::size_t c = 1;
    auto next_double = [&](const char* what) {
      double v;
      if (!try_parse_double(cells[c], v)) {
        throw std::runtime_error(dir + "/data.csv: row " + std::to_string(file_line) +
                                 ", column " + std::to_string(c + 1) + ": bad " + what);
      }
      ++c;
      return v;
    };
    for (Eigen::Index g = 0; g < g_count; ++g) ss.concentrations(row, g) = next_double("concentration");
    for (Eigen::Index g = 0; g < g_count; ++g) {
      const double v = next_double("label");
      if (v != 0.0 && v != 1.0) {
        throw std::runtime_error(dir + "/data.csv: row " + std::to_string(file_line) +
                                 ": label must be 0 or 1");
      }
      ss.labels(row, g) = static_cast<int>(v);
    }
    for (Eigen::Index p = 0; p < n_px; ++p) ss.absorbance(row, p) = next_double("absorbance");
    ++row;
  }
  if (row != n) {
    throw std::runtime_error(dir + "/data.csv: found " + std::to_string(row) +
                             " rows, manifest declares " + std::to_string(n));
  }
  return ss;
}

}  // namespace gasid
