#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsmt/config.hpp"
#include "dsmt/loop_detector.hpp"
#include "dsmt/lsst.hpp"
#include "dsmt/oracle.hpp"
#include "dsmt/thread_ring.hpp"

namespace dsmt {

enum class Mode { non_dsmt, pre_dsmt, full_dsmt };

enum class SquashReason { register_early_read, memory_early_read, lsst_mispredict, control_mispeculation };
inline constexpr int num_squash_reasons = 4;

std::string to_string(Mode m);
std::string to_string(SquashReason r);

enum class EndReason { halted, max_cycles, deadlock, fault };

std::string to_string(EndReason r);

struct CoreStats {
  uint64_t cycles = 0;
  uint64_t committed = 0;  // architectural, including any fast-skipped prefix
  uint64_t committed_detailed = 0;
  uint64_t committed_in_dsmt = 0;
  uint64_t clones = 0;
  uint64_t promotions = 0;
  std::array<uint64_t, num_squash_reasons> squashes{};
  uint64_t squashed_instructions = 0;
  uint64_t dsmt_episodes = 0;
  uint64_t lsst_correct = 0;
  uint64_t lsst_wrong = 0;
  std::vector<LsstEntry> lsst_entries;  // table as it stood when the last episode ended
  uint64_t branches = 0;
  uint64_t mispredicts = 0;
  uint64_t data_port_grants = 0;
  uint64_t fetch_port_grants = 0;
  int mdrt_peak = 0;
  std::string fault;

  uint64_t total_squashes() const;
};

/// Cycle-level DSMT core: per-context pipelines over shared functional
/// units, the thread creation unit and the speculative memory system.
class Core {
 public:
  Core(const SimConfig& cfg, const Program& prog, const ArchState& start);
  ~Core();
  Core(const Core&) = delete;
  Core& operator=(const Core&) = delete;

  /// Advances one cycle. Returns false once the run has ended.
  bool step();
  EndReason run();

  std::optional<EndReason> end_reason() const;
  uint64_t cycle() const;
  Mode mode() const;
  /// Branch pc of the loop being measured or cloned, outside non-DSMT mode.
  std::optional<uint32_t> active_loop() const;

  ArchState arch_state() const;
  /// Stores written to memory by the core, in commit order.
  const StoreTrace& store_trace() const;
  const CoreStats& stats() const;
  const LoopDetector& loops() const;
  const ThreadRing& ring() const;

  /// Throws ProtocolError when a structural or ring invariant is violated.
  void check_invariants() const;

  /// Per-cycle text trace: cycle, fetch assignment, commits per context.
  void set_trace(std::ostream* out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dsmt
