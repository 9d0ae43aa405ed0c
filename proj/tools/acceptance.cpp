// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dsmt/core.hpp"
#include "dsmt/harness.hpp"

using namespace dsmt;

namespace {

// Pinned tolerances.
constexpr double min_speedup_4 = 1.3;
constexpr double min_dsmt_fraction = 0.70;
constexpr double min_fallback_ratio = 0.95;
constexpr double min_vadd_lsst_accuracy = 0.99;
constexpr double max_stride_lsst_accuracy = 0.50;
constexpr double min_fetch_parity = 0.90;

const std::vector<std::string> suite{"vadd", "dot", "cond", "first_diff", "stride_irregular", "matmul3"};
const int context_counts[] = {1, 2, 4, 8};

std::map<std::string, Program> programs;

const Program& program(const std::string& name) {
  auto it = programs.find(name);
  if (it == programs.end()) it = programs.emplace(name, assemble_file(resolve_kernel(name))).first;
  return it->second;
}

using Key = std::tuple<std::string, int, FetchPolicy, bool>;
std::map<Key, SimReport> cache;

const SimReport& sim(const std::string& kernel, int contexts, FetchPolicy policy = FetchPolicy::icount2_8_modified,
                     bool strict = false) {
  Key k{kernel, contexts, policy, strict};
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  SimConfig cfg;
  cfg.context_count = contexts;
  cfg.fetch_policy = policy;
  cfg.strict_lbit_squash = strict;
  return cache.emplace(k, run_experiment(cfg, program(kernel), kernel)).first->second;
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Every kernel labels its measured loop `loop:`.
const LoopTableEntry* labelled_loop(const SimReport& r, const std::string& kernel) {
  uint32_t target = program(kernel).labels.at("loop");
  for (const auto& l : r.loops)
    if (l.target_addr == target) return &l;
  return nullptr;
}

void oracle_equivalence() {
  int runs = 0, passed = 0;
  std::string first_bad;
  for (const auto& k : suite)
    for (int c : context_counts)
      for (auto p : {FetchPolicy::icount2_8_modified, FetchPolicy::ideal})
        for (bool strict : {false, true}) {
          ++runs;
          const auto& r = sim(k, c, p, strict);
          if (r.verdict == Verdict::pass) ++passed;
          else if (first_bad.empty())
            first_bad = " first failure " + k + "/" + std::to_string(c) + "/" + to_string(p) +
                        (strict ? "/strict" : "");
        }
  report(1, passed == runs, std::to_string(passed) + "/" + std::to_string(runs) + " runs exact" + first_bad);
}

void speedup() {
  double i1 = sim("vadd", 1).ipc(), i2 = sim("vadd", 2).ipc(), i4 = sim("vadd", 4).ipc();
  bool ok = i1 <= i2 && i2 <= i4 && i4 / i1 >= min_speedup_4;
  report(2, ok, "vadd ipc " + fmt(i1) + " " + fmt(i2) + " " + fmt(i4) + ", ipc4/ipc1 " + fmt(i4 / i1));
}

void coverage() {
  double v = sim("vadd", 4).dsmt_fraction(), m = sim("matmul3", 4).dsmt_fraction();
  report(3, v >= min_dsmt_fraction && m >= min_dsmt_fraction,
         "committed in full-DSMT: vadd " + fmt(v) + ", matmul3 " + fmt(m) + " (4 contexts)");
}

void fallback() {
  const auto& r8 = sim("stride_irregular", 8);
  const auto& r1 = sim("stride_irregular", 1);
  const LoopTableEntry* walk = labelled_loop(r8, "stride_irregular");
  bool bad_first = walk && walk->quality == LoopQuality::bad && walk->episodes == 1;
  double ratio = r8.ipc() / r1.ipc();
  report(4, bad_first && ratio >= min_fallback_ratio,
         std::string("walk loop ") + (walk ? to_string(walk->quality) : "missing") + " after " +
             std::to_string(walk ? walk->episodes : 0) + " episode(s), ipc8/ipc1 " + fmt(ratio));
}

void lsst() {
  const auto& v = sim("vadd", 4);
  auto va = v.lsst_accuracy();
  bool saturated = !v.stats.lsst_entries.empty();
  for (const auto& e : v.stats.lsst_entries) saturated = saturated && e.confidence.value == 3;
  const auto& s = sim("stride_irregular", 4);
  auto sa = s.lsst_accuracy();
  const auto& sq = s.stats.squashes;
  const uint64_t lsst_n = sq[static_cast<int>(SquashReason::lsst_mispredict)];
  bool dominates = lsst_n > 0;
  for (int i = 0; i < num_squash_reasons; ++i)
    if (i != static_cast<int>(SquashReason::lsst_mispredict) && sq[i] >= lsst_n) dominates = false;
  bool ok = va && *va >= min_vadd_lsst_accuracy && saturated && sa && *sa < max_stride_lsst_accuracy &&
            dominates;
  report(5, ok,
         "vadd accuracy " + (va ? fmt(*va) : "-") + (saturated ? " all confidences 3" : " unsaturated") +
             "; stride_irregular accuracy " + (sa ? fmt(*sa) : "-") + ", LsstMispredict " +
             std::to_string(lsst_n) + " of " + std::to_string(s.stats.total_squashes()) + " squashes");
}

void squash_soundness() {
  bool ok = true;
  std::string detail;
  for (auto k : {"cond", "first_diff"}) {
    bool exact = true;
    for (auto p : {FetchPolicy::icount2_8_modified, FetchPolicy::ideal})
      for (bool strict : {false, true}) {
        const auto& r = sim(k, 8, p, strict);
        exact = exact && r.verdict == Verdict::pass && r.store_trace_match;
      }
    const auto& base = sim(k, 8);
    ok = ok && base.stats.total_squashes() > 0 && exact;
    detail += std::string(k) + " " + std::to_string(base.stats.total_squashes()) + " squashes" +
              (exact ? " exact; " : " NOT exact; ");
  }
  report(6, ok, detail + "8 contexts");
}

void fetch_parity() {
  bool ok = true;
  std::string detail;
  for (int c : context_counts) {
    double lm = 0, li = 0;
    for (const auto& k : suite) {
      lm += std::log(sim(k, c).ipc());
      li += std::log(sim(k, c, FetchPolicy::ideal).ipc());
    }
    double ratio = std::exp((lm - li) / static_cast<double>(suite.size()));
    ok = ok && ratio >= min_fetch_parity;
    detail += std::to_string(c) + ":" + fmt(ratio) + " ";
  }
  report(7, ok, "geomean ipc icount2.8m/ideal " + detail);
}

void nest_selection() {
  const Program& p = program("matmul3");
  SimConfig cfg;
  cfg.context_count = 4;
  Core core(cfg, p, initial_state(p));
  // levels cloned since the nest's selected/discarded marks last changed
  std::set<uint32_t> after_selection;
  std::vector<int> marks, prev;
  bool overlap = false;
  while (core.step()) {
    marks.clear();
    for (const auto& [pc, e] : core.loops().table()) marks.push_back(e.selected + 2 * e.discarded);
    if (marks != prev) {
      after_selection.clear();
      prev = marks;
    }
    if (core.ring().size() <= 1) continue;
    auto a = core.active_loop();
    if (!a) {
      overlap = true;
      continue;
    }
    after_selection.insert(*a);
  }
  const LoopTableEntry* chosen = nullptr;
  int selected = 0;
  for (const auto& [pc, e] : core.loops().table())
    if (e.selected) {
      chosen = &e;
      ++selected;
    }
  bool beats = chosen && chosen->sipc_history;
  int discarded = 0;
  for (const auto& [pc, e] : core.loops().table())
    if (e.discarded) {
      ++discarded;
      beats = beats && e.sipc_history && *chosen->sipc_history > *e.sipc_history;
    }
  bool only_chosen = after_selection.size() == 1 && chosen &&
                     *after_selection.begin() == chosen->branch_addr;
  bool ok = core.end_reason() == EndReason::halted && !overlap && selected == 1 && discarded >= 1 && beats &&
            only_chosen;
  char where[16];
  std::snprintf(where, sizeof where, "0x%08X", chosen ? chosen->branch_addr : 0u);
  report(8, ok,
         std::string("matmul3 selected ") + where + " sipc " +
             (chosen && chosen->sipc_history ? fmt(*chosen->sipc_history) : "-") + " over " +
             std::to_string(discarded) + " discarded level(s); cloning after final selection on " +
             std::to_string(after_selection.size()) + " level(s)");
}

void property_suites(const char* self) {
  std::string dir(self);
  auto slash = dir.find_last_of('/');
  dir = slash == std::string::npos ? "." : dir.substr(0, slash);
  std::string cmd = dir + "/tests/dsmt-properties --gtest_brief=1 > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  report(9, rc == 0, "exhaustive property suites (dsmt-properties) exit " + std::to_string(rc));
}

void determinism() {
  bool ok = true;
  int n = 0;
  for (const auto& k : suite) {
    int c = context_counts[n % 4];
    auto p = n % 2 ? FetchPolicy::ideal : FetchPolicy::icount2_8_modified;
    SimConfig cfg;
    cfg.context_count = c;
    cfg.fetch_policy = p;
    SimReport a = run_experiment(cfg, program(k), k);
    SimReport b = run_experiment(cfg, program(k), k);
    for (auto f : {ReportFormat::text, ReportFormat::json, ReportFormat::csv})
      ok = ok && emit_report(a, f) == emit_report(b, f);
    ++n;
  }
  report(10, ok, std::to_string(n) + " kernels run twice, reports byte-identical");
}

}  // namespace

int main(int, char** argv) {
  try {
    oracle_equivalence();
    speedup();
    coverage();
    fallback();
    lsst();
    squash_soundness();
    fetch_parity();
    nest_selection();
    property_suites(argv[0]);
    determinism();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
