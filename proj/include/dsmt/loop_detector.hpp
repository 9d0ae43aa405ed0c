#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dsmt {

enum class LoopQuality { unknown, good, bad };

std::string to_string(LoopQuality q);

/// Loop-table record kept alongside the BTB, keyed by branch address.
struct LoopTableEntry {
  uint32_t branch_addr = 0;
  uint32_t target_addr = 0;
  bool loop_flag = false;
  uint64_t iter_count = 0;  // length of the current consecutive-taken run
  LoopQuality quality = LoopQuality::unknown;
  std::optional<double> sipc_history;
  std::optional<double> pre_dsmt_ipc;
  double run_length = 0;  // committed instructions per iteration, averaged
  bool discarded = false;  // dropped by nest selection
  bool selected = false;   // won a nest selection

  // episode statistics
  uint64_t episodes = 0;
  uint64_t dsmt_iterations = 0;
  uint64_t total_iterations = 0;
};

enum class ModeEventKind { none, enter_pre_dsmt, loop_exit };

struct ModeEvent {
  ModeEventKind kind = ModeEventKind::none;
  uint32_t branch_addr = 0;
};

struct LoopRange {
  uint32_t branch_addr;
  uint32_t target_addr;
  std::optional<double> sipc;
};

/// Nest of loops, innermost at the bottom (index 0). Every entry's address
/// range strictly contains the range of the entry below it.
class LoopStack {
 public:
  enum class Offer { pushed, present, inner, reset };

  /// Offers a newly detected loop: pushed when it encloses the top, ignored
  /// when already present or nested inside the top, otherwise the stack is
  /// reset to the new loop alone.
  Offer offer(uint32_t branch_addr, uint32_t target_addr);

  void record_sipc(uint32_t branch_addr, double sipc);
  bool all_measured() const;

  /// Keeps only the entry with the highest SIPC (unmeasured entries rank
  /// lowest, ties keep the inner loop). Returns the chosen entry and the
  /// discarded ones.
  std::pair<LoopRange, std::vector<LoopRange>> select();

  const std::vector<LoopRange>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  const LoopRange& top() const { return entries_.back(); }

 private:
  std::vector<LoopRange> entries_;
};

bool encloses(uint32_t outer_branch, uint32_t outer_target, uint32_t inner_branch,
              uint32_t inner_target);

class LoopDetector {
 public:
  /// Feeds one committed branch of the non-speculative thread.
  ModeEvent observe_branch(uint32_t pc, uint32_t target, bool taken);

  LoopTableEntry* entry(uint32_t branch_addr);
  const LoopTableEntry* entry(uint32_t branch_addr) const;
  const std::map<uint32_t, LoopTableEntry>& table() const { return table_; }

  LoopStack& stack() { return stack_; }
  const LoopStack& stack() const { return stack_; }

  /// Runs nest selection when the stack holds two or more measured levels;
  /// losers are marked discarded and never trigger pre-DSMT again.
  std::optional<uint32_t> nest_select();

 private:
  std::map<uint32_t, LoopTableEntry> table_;
  LoopStack stack_;
};

/// Sustained IPC of a DSMT window: committed/cycles, gated to zero when the
/// per-iteration run length is below `min_run_length` or fewer iterations
/// were observed than contexts are available.
double compute_sipc(uint64_t committed_in_dsmt, uint64_t cycles_in_dsmt, double run_length,
                    uint64_t observed_iterations, int contexts_available, int min_run_length);

/// Break-even rule: Good iff the DSMT measure is at least the sequential IPC.
LoopQuality classify(double sipc, double pre_dsmt_ipc);

}  // namespace dsmt
