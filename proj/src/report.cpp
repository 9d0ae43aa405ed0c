#include "dsmt/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dsmt {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::failed: return "FAILED";
    default: return "INCOMPLETE";
  }
}

namespace {

double ratio(uint64_t a, uint64_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; }

std::string hex(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? fixed(*v) : "-"; }

}  // namespace

double SimReport::ipc() const { return ratio(stats.committed_detailed, stats.cycles); }
double SimReport::dsmt_fraction() const { return ratio(stats.committed_in_dsmt, stats.committed_detailed); }
double SimReport::mispredict_rate() const { return ratio(stats.mispredicts, stats.branches); }
double SimReport::data_port_utilization() const { return ratio(stats.data_port_grants, stats.cycles); }

std::optional<double> SimReport::lsst_accuracy() const {
  uint64_t n = stats.lsst_correct + stats.lsst_wrong;
  if (!n) return std::nullopt;
  return ratio(stats.lsst_correct, n);
}

const LoopTableEntry* SimReport::selected_loop() const {
  for (const auto& l : loops)
    if (l.selected) return &l;
  return nullptr;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "text") return ReportFormat::text;
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format '" + s + "'");
}

namespace {

constexpr std::array<SquashReason, num_squash_reasons> reasons{
    SquashReason::register_early_read, SquashReason::memory_early_read,
    SquashReason::lsst_mispredict, SquashReason::control_mispeculation};

std::string text(const SimReport& r) {
  std::ostringstream o;
  const auto& s = r.stats;
  o << "kernel: " << r.kernel << '\n'
    << "contexts: " << r.contexts << "  fetch_policy: " << to_string(r.fetch_policy)
    << "  strict_lbit_squash: " << (r.strict_lbit_squash ? "on" : "off") << "  fast_skip: " << r.fast_skip
    << '\n'
    << "verdict: " << to_string(r.verdict) << " (" << to_string(r.end) << ")\n";
  for (const auto& m : r.mismatches) o << "  mismatch " << format_mismatch(m) << '\n';
  if (!r.store_trace_match) o << "  store trace differs from reference\n";
  if (!s.fault.empty()) o << "  fault: " << s.fault << '\n';
  o << "cycles: " << s.cycles << '\n'
    << "committed: " << s.committed << " (reference " << r.oracle_committed << ", detailed "
    << s.committed_detailed << ")\n"
    << "ipc: " << fixed(r.ipc()) << '\n'
    << "committed_in_dsmt: " << s.committed_in_dsmt << " (" << fixed(r.dsmt_fraction()) << ")\n"
    << "episodes: " << s.dsmt_episodes << "  clones: " << s.clones << "  promotions: " << s.promotions
    << '\n'
    << "squashes:";
  for (auto reason : reasons) o << ' ' << to_string(reason) << '=' << s.squashes[static_cast<int>(reason)];
  o << "  squashed_instructions=" << s.squashed_instructions << '\n'
    << "lsst_accuracy: " << opt(r.lsst_accuracy()) << " (" << s.lsst_correct << " correct, "
    << s.lsst_wrong << " wrong)\n";
  for (const auto& e : s.lsst_entries)
    o << "  lsst r" << e.reg << " stride " << e.stride << " confidence " << int(e.confidence.value) << '\n';
  o << "branch_mispredict_rate: " << fixed(r.mispredict_rate()) << " (" << s.mispredicts << '/'
    << s.branches << ")\n"
    << "data_port_utilization: " << fixed(r.data_port_utilization()) << " per cycle\n"
    << "mdrt_peak: " << s.mdrt_peak << '\n'
    << "loops:\n"
    << "  branch      target      quality  sipc    pre_ipc run_len episodes dsmt_iter  nest\n";
  for (const auto& l : r.loops) {
    char line[200];
    std::snprintf(line, sizeof line, "  %s  %s  %-7s  %-6s  %-6s  %-6.1f  %-8llu %-9llu  %s\n",
                  hex(l.branch_addr).c_str(), hex(l.target_addr).c_str(), to_string(l.quality).c_str(),
                  opt(l.sipc_history).c_str(), opt(l.pre_dsmt_ipc).c_str(), l.run_length,
                  static_cast<unsigned long long>(l.episodes),
                  static_cast<unsigned long long>(l.dsmt_iterations),
                  l.selected ? "selected" : l.discarded ? "discarded" : "-");
    o << line;
  }
  return o.str();
}

nlohmann::ordered_json json(const SimReport& r) {
  const auto& s = r.stats;
  nlohmann::ordered_json j;
  j["kernel"] = r.kernel;
  j["contexts"] = r.contexts;
  j["fetch_policy"] = to_string(r.fetch_policy);
  j["strict_lbit_squash"] = r.strict_lbit_squash;
  j["fast_skip"] = r.fast_skip;
  j["verdict"] = to_string(r.verdict);
  j["end"] = to_string(r.end);
  j["store_trace_match"] = r.store_trace_match;
  auto& mm = j["mismatches"] = nlohmann::ordered_json::array();
  for (const auto& m : r.mismatches)
    mm.push_back({{"location", m.location}, {"expected", m.expected}, {"actual", m.actual}});
  j["fault"] = s.fault;
  j["cycles"] = s.cycles;
  j["committed"] = s.committed;
  j["reference_committed"] = r.oracle_committed;
  j["committed_detailed"] = s.committed_detailed;
  j["ipc"] = r.ipc();
  j["committed_in_dsmt"] = s.committed_in_dsmt;
  j["dsmt_fraction"] = r.dsmt_fraction();
  j["episodes"] = s.dsmt_episodes;
  j["clones"] = s.clones;
  j["promotions"] = s.promotions;
  auto& sq = j["squashes"];
  for (auto reason : reasons) sq[to_string(reason)] = s.squashes[static_cast<int>(reason)];
  j["squashed_instructions"] = s.squashed_instructions;
  auto acc = r.lsst_accuracy();
  j["lsst_accuracy"] = acc ? nlohmann::ordered_json(*acc) : nlohmann::ordered_json(nullptr);
  j["lsst_correct"] = s.lsst_correct;
  j["lsst_wrong"] = s.lsst_wrong;
  auto& le = j["lsst_entries"] = nlohmann::ordered_json::array();
  for (const auto& e : s.lsst_entries)
    le.push_back({{"reg", e.reg}, {"stride", e.stride}, {"confidence", e.confidence.value}});
  j["branches"] = s.branches;
  j["mispredicts"] = s.mispredicts;
  j["branch_mispredict_rate"] = r.mispredict_rate();
  j["data_port_utilization"] = r.data_port_utilization();
  j["mdrt_peak"] = s.mdrt_peak;
  auto& loops = j["loops"] = nlohmann::ordered_json::array();
  for (const auto& l : r.loops) {
    nlohmann::ordered_json e;
    e["branch"] = hex(l.branch_addr);
    e["target"] = hex(l.target_addr);
    e["quality"] = to_string(l.quality);
    e["sipc"] = l.sipc_history ? nlohmann::ordered_json(*l.sipc_history) : nlohmann::ordered_json(nullptr);
    e["pre_dsmt_ipc"] =
        l.pre_dsmt_ipc ? nlohmann::ordered_json(*l.pre_dsmt_ipc) : nlohmann::ordered_json(nullptr);
    e["run_length"] = l.run_length;
    e["episodes"] = l.episodes;
    e["dsmt_iterations"] = l.dsmt_iterations;
    e["selected"] = l.selected;
    e["discarded"] = l.discarded;
    loops.push_back(e);
  }
  return j;
}

}  // namespace

std::string csv_header() {
  return "kernel,contexts,fetch_policy,strict_lbit_squash,fast_skip,verdict,cycles,committed,ipc,"
         "committed_in_dsmt,dsmt_fraction,clones,promotions,squash_register,squash_memory,"
         "squash_lsst,squash_control,lsst_accuracy,branch_mispredict_rate,data_port_utilization,"
         "mdrt_peak";
}

std::string emit_report(const SimReport& r, ReportFormat f) {
  if (f == ReportFormat::text) return text(r);
  if (f == ReportFormat::json) return json(r).dump(2) + "\n";
  const auto& s = r.stats;
  std::ostringstream o;
  auto acc = r.lsst_accuracy();
  o << r.kernel << ',' << r.contexts << ',' << to_string(r.fetch_policy) << ','
    << (r.strict_lbit_squash ? 1 : 0) << ',' << r.fast_skip << ',' << to_string(r.verdict) << ','
    << s.cycles << ',' << s.committed << ',' << fixed(r.ipc(), 6) << ',' << s.committed_in_dsmt << ','
    << fixed(r.dsmt_fraction(), 6);
  o << ',' << s.clones << ',' << s.promotions;
  for (auto v : s.squashes) o << ',' << v;
  o << ',' << (acc ? fixed(*acc, 6) : "") << ',' << fixed(r.mispredict_rate(), 6) << ','
    << fixed(r.data_port_utilization(), 6) << ',' << s.mdrt_peak << '\n';
  return o.str();
}

}  // namespace dsmt
