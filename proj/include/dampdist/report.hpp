// SPDX-License-Identifier: Apache-2.0
//
// Deterministic result files: CSV tables with stable numeric formatting and
// a manifest that fingerprints the inputs of a run.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dampdist {

/// Shortest round-trip decimal form, identical across runs and platforms.
std::string fmt_num(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void write(const std::filesystem::path& path) const;
};

/// 64-bit FNV-1a digest of a file's bytes.
std::uint64_t fnv1a_digest(const std::filesystem::path& path);

/// One named pass/fail result with the residual it was judged on.
struct RunCheck {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Wall-clock accounting for one pipeline stage.
struct RunStep {
  std::string name;
  std::string status;  ///< PASS, FAIL or SKIP
  double wall_ms = 0.0;
};

struct RunManifest {
  std::string command;
  std::string input_path;
  std::uint64_t input_digest = 0;
  std::map<std::string, std::string> options;
  std::vector<RunStep> steps;
  std::vector<RunCheck> checks;
  std::vector<std::string> outputs;

  bool all_pass() const;

  /// Serializes to JSON through a temporary, then renames into place.
  void write(const std::filesystem::path& path) const;
};

}  // namespace dampdist
