// SPDX-License-Identifier: Apache-2.0

#include "dampdist/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dampdist {

std::string fmt_num(double v) {
  if (v == 0.0) return "0";  // collapse negative zero
  char buf[40];
  // Round-trip precision, then trim what shorter forms preserve.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

std::uint64_t fnv1a_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

bool RunManifest::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  for (const auto& s : steps)
    if (s.status == "FAIL") return false;
  return true;
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["tool"] = "dampdist 1.0";
  j["command"] = command;
  j["input"] = input_path;
  char digest[20];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(input_digest));
  j["input_fnv1a64"] = digest;
  j["options"] = options;
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : steps)
    j["steps"].push_back({{"name", s.name},
                          {"status", s.status},
                          {"wall_ms", s.wall_ms}});
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name},
                           {"residual", c.residual},
                           {"threshold", c.threshold},
                           {"pass", c.pass}});
  j["all_pass"] = all_pass();
  j["outputs"] = outputs;
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dampdist
