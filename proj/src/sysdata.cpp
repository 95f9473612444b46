// SPDX-License-Identifier: Apache-2.0

#include "dampdist/sysdata.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dampdist {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw DataError(msg); }

double get_num(const json& j, const std::string& key, const std::string& where,
               std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(where + ": missing required field '" + key + "'");
  }
  if (!j[key].is_number()) fail(where + ": field '" + key + "' must be numeric");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    fail(where + ": missing integer field '" + key + "'");
  return j[key].get<int>();
}

std::string bus_label(int id) { return "bus " + std::to_string(id); }

}  // namespace

const ExciterSpec& SystemSpec::exciter_at(int bus) const {
  static const ExciterSpec kManual{};
  auto it = exciters.find(bus);
  return it == exciters.end() ? kManual : it->second;
}

bool SystemSpec::has_exciters() const {
  return std::any_of(exciters.begin(), exciters.end(), [](const auto& kv) {
    return kv.second.kind != ExciterKind::Manual;
  });
}

SystemSpec as_simplified(const SystemSpec& sys) {
  SystemSpec out = sys;
  for (auto& m : out.machines) m.order = MachineOrder::Third;
  out.exciters.clear();
  return out;
}

SystemSpec load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open system file: " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("parse failure in " + path.string() + ": " + e.what());
  }

  SystemSpec sys;
  sys.name = root.value("name", path.stem().string());
  if (root.contains("base")) {
    sys.s_base_mva = get_num(root["base"], "mva", "base", 100.0);
    sys.f_base_hz = get_num(root["base"], "hz", "base", 60.0);
  }

  if (!root.contains("buses") || !root["buses"].is_array())
    fail("system file needs a 'buses' array");
  for (const auto& jb : root["buses"]) {
    BusSpec b;
    b.id = get_int(jb, "id", "bus record");
    const std::string where = bus_label(b.id);
    std::string kind = jb.value("kind", "load");
    if (kind == "generator") {
      b.kind = BusKind::Generator;
    } else if (kind == "load") {
      b.kind = BusKind::Load;
    } else {
      fail(where + ": unknown kind '" + kind + "'");
    }
    b.p_load = get_num(jb, "p_load", where, 0.0);
    b.q_load = get_num(jb, "q_load", where, 0.0);
    b.base_kv = get_num(jb, "base_kv", where, 0.0);
    sys.buses.push_back(b);
  }

  if (!root.contains("branches") || !root["branches"].is_array())
    fail("system file needs a 'branches' array");
  for (const auto& jb : root["branches"]) {
    BranchSpec br;
    br.from = get_int(jb, "from", "branch record");
    br.to = get_int(jb, "to", "branch record");
    const std::string where =
        "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
    br.r = get_num(jb, "r", where, 0.0);
    br.x = get_num(jb, "x", where);
    br.b_sh = get_num(jb, "b_sh", where, 0.0);
    sys.branches.push_back(br);
  }

  if (!root.contains("machines") || !root["machines"].is_array())
    fail("system file needs a 'machines' array");
  for (const auto& jm : root["machines"]) {
    MachineSpec m;
    m.bus = get_int(jm, "bus", "machine record");
    const std::string where = "machine at " + bus_label(m.bus);
    std::string order = jm.value("order", "third");
    if (order == "third") {
      m.order = MachineOrder::Third;
    } else if (order == "fourth") {
      m.order = MachineOrder::Fourth;
    } else {
      fail(where + ": unknown order '" + order + "'");
    }
    m.h = get_num(jm, "h", where);
    m.xd = get_num(jm, "xd", where);
    m.xd_p = get_num(jm, "xd_p", where);
    m.xq = get_num(jm, "xq", where);
    m.xq_p = get_num(jm, "xq_p", where, m.xq);
    m.tdo_p = get_num(jm, "tdo_p", where);
    m.tqo_p = get_num(jm, "tqo_p", where, 0.0);
    sys.machines.push_back(m);
  }

  if (root.contains("exciters")) {
    for (const auto& je : root["exciters"]) {
      int bus = get_int(je, "bus", "exciter record");
      const std::string where = "exciter at " + bus_label(bus);
      ExciterSpec e;
      std::string kind = je.value("kind", "manual");
      if (kind == "manual") {
        e.kind = ExciterKind::Manual;
      } else if (kind == "static_first_order") {
        e.kind = ExciterKind::StaticFirstOrder;
        e.ka = get_num(je, "ka", where);
        e.tr = get_num(je, "tr", where);
      } else if (kind == "st1a_pss") {
        e.kind = ExciterKind::St1aPss;
        e.ka = get_num(je, "ka", where);
        e.tr = get_num(je, "tr", where);
        e.k_pss = get_num(je, "k_pss", where);
        e.t_w = get_num(je, "t_w", where);
        e.t1 = get_num(je, "t1", where);
        e.t2 = get_num(je, "t2", where);
      } else {
        fail(where + ": unknown kind '" + kind + "'");
      }
      sys.exciters[bus] = e;
    }
  }

  if (root.contains("dispatch")) {
    const auto& jd = root["dispatch"];
    if (jd.contains("pg")) sys.dispatch.pg = jd["pg"].get<std::vector<double>>();
    if (jd.contains("vsched"))
      sys.dispatch.vsched = jd["vsched"].get<std::vector<double>>();
    if (jd.contains("slack")) sys.dispatch.slack_bus = jd["slack"].get<int>();
  }

  validate_system(sys);
  return sys;
}

void validate_system(const SystemSpec& sys) {
  const int n = sys.n_bus();
  const int ng = sys.n_gen();
  if (n == 0) fail("system has no buses");
  if (ng == 0) fail("system has no machines");

  std::set<int> seen;
  for (const auto& b : sys.buses) {
    if (!seen.insert(b.id).second) fail(bus_label(b.id) + ": duplicate bus id");
  }
  for (int i = 0; i < n; ++i) {
    if (sys.buses[i].id != i + 1)
      fail(bus_label(sys.buses[i].id) + ": bus ids must be contiguous 1.." +
           std::to_string(n) + " with generator buses first");
  }
  for (int i = 0; i < n; ++i) {
    bool should_be_gen = i < ng;
    bool is_gen = sys.buses[i].kind == BusKind::Generator;
    if (should_be_gen != is_gen)
      fail(bus_label(i + 1) + ": generator buses must occupy ids 1.." +
           std::to_string(ng));
  }

  for (int i = 0; i < ng; ++i) {
    const auto& m = sys.machines[i];
    const std::string where = "machine at " + bus_label(m.bus);
    if (m.bus != i + 1)
      fail(where + ": machine order must follow bus order (expected bus " +
           std::to_string(i + 1) + ")");
    if (m.h <= 0) fail(where + ": inertia h must be positive");
    if (m.xd_p <= 0 || m.xd <= m.xd_p)
      fail(where + ": need 0 < xd_p < xd");
    if (m.xq <= 0) fail(where + ": xq must be positive");
    if (m.tdo_p <= 0) fail(where + ": tdo_p must be positive");
    if (m.order == MachineOrder::Fourth) {
      if (m.xq_p <= 0 || m.xq <= m.xq_p)
        fail(where + ": fourth order needs 0 < xq_p < xq");
      if (m.tqo_p <= 0) fail(where + ": fourth order needs tqo_p > 0");
    }
  }

  for (const auto& br : sys.branches) {
    const std::string where =
        "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
    if (br.from < 1 || br.from > n || br.to < 1 || br.to > n)
      fail(where + ": endpoint is not a known bus");
    if (br.from == br.to) fail(where + ": self loop");
    if (br.x <= 0) fail(where + ": series reactance must be positive");
    if (br.b_sh < 0) fail(where + ": line charging must be nonnegative");
    if (br.r != 0.0)
      fail(where + ": lossless network required (series r must be 0)");
  }

  // Connectivity over branch graph.
  std::vector<int> comp(n, -1);
  std::vector<int> stack = {0};
  comp[0] = 0;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (const auto& br : sys.branches) {
      int a = br.from - 1, b = br.to - 1;
      if (a == u && comp[b] < 0) { comp[b] = 0; stack.push_back(b); }
      if (b == u && comp[a] < 0) { comp[a] = 0; stack.push_back(a); }
    }
  }
  for (int i = 0; i < n; ++i)
    if (comp[i] < 0) fail(bus_label(i + 1) + ": disconnected from bus 1");

  for (const auto& [bus, e] : sys.exciters) {
    const std::string where = "exciter at " + bus_label(bus);
    if (bus < 1 || bus > ng) fail(where + ": no machine at that bus");
    if (e.kind == ExciterKind::StaticFirstOrder || e.kind == ExciterKind::St1aPss) {
      if (e.ka <= 0 || e.tr <= 0) fail(where + ": need ka > 0 and tr > 0");
    }
    if (e.kind == ExciterKind::St1aPss) {
      if (e.t_w <= 0 || e.t2 <= 0)
        fail(where + ": stabilizer needs t_w > 0 and t2 > 0");
    }
  }

  const auto& d = sys.dispatch;
  if (static_cast<int>(d.pg.size()) != ng)
    fail("dispatch: pg must list one value per machine");
  if (static_cast<int>(d.vsched.size()) != ng)
    fail("dispatch: vsched must list one value per machine");
  for (int i = 0; i < ng; ++i) {
    if (d.vsched[i] <= 0)
      fail("dispatch: vsched for " + bus_label(i + 1) + " must be positive");
  }
  if (d.slack_bus != -1 && (d.slack_bus < 1 || d.slack_bus > ng))
    fail("dispatch: slack bus " + std::to_string(d.slack_bus) +
         " is not a machine bus");
}

Eigen::MatrixXcd build_ybus(const SystemSpec& sys, bool allow_resistance) {
  const int n = sys.n_bus();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : sys.branches) {
    if (!allow_resistance && br.r != 0.0)
      throw DataError("branch " + std::to_string(br.from) + "-" +
                      std::to_string(br.to) +
                      ": lossless network required (series r must be 0)");
    const int a = br.from - 1;
    const int b = br.to - 1;
    const std::complex<double> zser(br.r, br.x);
    const std::complex<double> yser = 1.0 / zser;
    const std::complex<double> ysh(0.0, 0.5 * br.b_sh);
    y(a, a) += yser + ysh;
    y(b, b) += yser + ysh;
    y(a, b) -= yser;
    y(b, a) -= yser;
  }
  return y;
}

}  // namespace dampdist
