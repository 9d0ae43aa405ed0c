#include "dsmt/config.hpp"

#include <fstream>
#include <functional>
#include <stdexcept>

namespace dsmt {

std::string to_string(FetchPolicy p) {
  return p == FetchPolicy::ideal ? "ideal" : "icount2.8m";
}

FetchPolicy parse_fetch_policy(const std::string& s) {
  if (s == "icount2.8m" || s == "icount2.8-modified") return FetchPolicy::icount2_8_modified;
  if (s == "ideal") return FetchPolicy::ideal;
  throw std::invalid_argument("unknown fetch policy '" + s + "'");
}

namespace {

int64_t to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for '" + key + "': '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("bad flag for '" + key + "': '" + v + "'");
}

const std::array<const char*, num_fu_classes> fu_keys{"int_alu", "int_mul", "int_div", "fp_add",
                                                      "fp_mul",  "fp_div",  "load_store"};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void SimConfig::set(const std::string& key, const std::string& value) {
  auto& p = pipeline;
  auto i = [&] { return to_int(key, value); };
  const std::map<std::string, std::function<void()>> setters{
      {"contexts", [&] { context_count = static_cast<int>(i()); }},
      {"context_count", [&] { context_count = static_cast<int>(i()); }},
      {"fetch_policy", [&] { fetch_policy = parse_fetch_policy(value); }},
      {"fast_skip", [&] { fast_skip = static_cast<uint64_t>(i()); }},
      {"max_cycles", [&] { max_cycles = static_cast<uint64_t>(i()); }},
      {"strict_lbit_squash", [&] { strict_lbit_squash = to_bool(key, value); }},
      {"mdrt_capacity", [&] { mdrt_capacity = static_cast<int>(i()); }},
      {"pre_dsmt_iterations", [&] { pre_dsmt_iterations = static_cast<int>(i()); }},
      {"lsst_threshold", [&] { lsst_threshold = static_cast<int>(i()); }},
      {"lsst_initial_confidence", [&] { lsst_initial_confidence = static_cast<int>(i()); }},
      {"read_confidence_initial", [&] { read_confidence_initial = static_cast<int>(i()); }},
      {"read_confidence_threshold", [&] { read_confidence_threshold = static_cast<int>(i()); }},
      {"clone_cost", [&] { clone_cost = static_cast<int>(i()); }},
      {"min_run_length", [&] { min_run_length = static_cast<int>(i()); }},
      {"measurement_window", [&] { measurement_window = static_cast<uint64_t>(i()); }},
      {"iq_size", [&] { p.iq_size = static_cast<int>(i()); }},
      {"lsq_size", [&] { p.lsq_size = static_cast<int>(i()); }},
      {"rob_size", [&] { p.rob_size = static_cast<int>(i()); }},
      {"btb_entries", [&] { p.btb_entries = static_cast<int>(i()); }},
      {"btb_ways", [&] { p.btb_ways = static_cast<int>(i()); }},
      {"issue_width", [&] { p.issue_width_per_context = static_cast<int>(i()); }},
      {"fetch_ports", [&] { p.fetch_ports = static_cast<int>(i()); }},
      {"fetch_width", [&] { p.fetch_width_per_port = static_cast<int>(i()); }},
      {"fetch_buffer_size", [&] { p.fetch_buffer_size = static_cast<int>(i()); }},
      {"lat_int_alu", [&] { p.latencies.int_alu = static_cast<int>(i()); }},
      {"lat_int_mul", [&] { p.latencies.int_mul = static_cast<int>(i()); }},
      {"lat_int_div", [&] { p.latencies.int_div = static_cast<int>(i()); }},
      {"lat_fp_add", [&] { p.latencies.fp_add = static_cast<int>(i()); }},
      {"lat_fp_mul", [&] { p.latencies.fp_mul = static_cast<int>(i()); }},
      {"lat_fp_div", [&] { p.latencies.fp_div = static_cast<int>(i()); }},
      {"lat_address_gen", [&] { p.latencies.address_gen = static_cast<int>(i()); }},
      {"l1_hit", [&] { cache.l1_hit = static_cast<int>(i()); }},
      {"l2_hit", [&] { cache.l2_hit = static_cast<int>(i()); }},
      {"memory_latency", [&] { cache.memory = static_cast<int>(i()); }},
      {"data_ports", [&] { cache.data_ports = static_cast<int>(i()); }},
  };
  if (auto it = setters.find(key); it != setters.end()) {
    it->second();
    return;
  }
  for (int c = 0; c < num_fu_classes; ++c) {
    if (key == std::string("fu_") + fu_keys[c]) {
      p.fu_counts[c] = static_cast<int>(i());
      return;
    }
    if (key == std::string("rs_") + fu_keys[c]) {
      p.rs_counts[c] = static_cast<int>(i());
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void SimConfig::validate() const {
  if (context_count != 1 && context_count != 2 && context_count != 4 && context_count != 8)
    throw std::invalid_argument("contexts must be 1, 2, 4 or 8");
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  positive(pipeline.iq_size, "iq_size");
  positive(pipeline.lsq_size, "lsq_size");
  positive(pipeline.rob_size, "rob_size");
  positive(pipeline.issue_width_per_context, "issue_width");
  positive(pipeline.fetch_ports, "fetch_ports");
  positive(pipeline.fetch_width_per_port, "fetch_width");
  positive(pipeline.fetch_buffer_size, "fetch_buffer_size");
  positive(pipeline.btb_ways, "btb_ways");
  positive(cache.data_ports, "data_ports");
  positive(mdrt_capacity, "mdrt_capacity");
  positive(pre_dsmt_iterations, "pre_dsmt_iterations");
  if (pipeline.btb_entries < pipeline.btb_ways || pipeline.btb_entries % pipeline.btb_ways)
    throw std::invalid_argument("btb_entries must be a multiple of btb_ways");
  for (int c = 0; c < num_fu_classes; ++c) {
    positive(pipeline.fu_counts[c], "fu count");
    positive(pipeline.rs_counts[c], "rs count");
  }
  if (max_cycles == 0) throw std::invalid_argument("max_cycles must be positive");
  if (clone_cost < 0) throw std::invalid_argument("clone_cost must be non-negative");
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key=value");
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

}  // namespace dsmt
