#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsmt/config.hpp"
#include "dsmt/core.hpp"
#include "dsmt/loop_detector.hpp"
#include "dsmt/oracle.hpp"

namespace dsmt {

enum class Verdict { pass, failed, incomplete };

std::string to_string(Verdict v);

struct SimReport {
  std::string kernel;
  int contexts = 1;
  FetchPolicy fetch_policy = FetchPolicy::icount2_8_modified;
  bool strict_lbit_squash = false;
  uint64_t fast_skip = 0;

  Verdict verdict = Verdict::incomplete;
  EndReason end = EndReason::halted;
  std::vector<Mismatch> mismatches;
  bool store_trace_match = false;
  uint64_t oracle_committed = 0;

  CoreStats stats;
  std::vector<LoopTableEntry> loops;

  double ipc() const;
  double dsmt_fraction() const;
  std::optional<double> lsst_accuracy() const;
  double mispredict_rate() const;
  double data_port_utilization() const;
  /// Loop chosen by nest selection, if a selection happened.
  const LoopTableEntry* selected_loop() const;
};

enum class ReportFormat { text, json, csv };

ReportFormat parse_report_format(const std::string& s);

std::string emit_report(const SimReport& r, ReportFormat f);
std::string csv_header();

}  // namespace dsmt
