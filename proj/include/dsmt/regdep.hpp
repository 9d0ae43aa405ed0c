#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dsmt/branch_predictor.hpp"
#include "dsmt/isa.hpp"
#include "dsmt/thread_ring.hpp"

namespace dsmt {

/// Per-context register cell. The pending ROB producer (busy tag) is kept
/// by the pipeline's rename map.
struct RegisterCell {
  uint32_t value = 0;
  bool r = false;  // committed by this thread in its current iteration
  bool d = false;  // read before written while the anchor said a predecessor writes it
  bool l = false;  // input taken from outside this thread (speculative read)
  bool lsst_seed = false;  // the latched input is an LSST prediction
  uint32_t read_value = 0;  // value the speculative read observed
};

using RegisterFile = std::array<RegisterCell, num_regs>;
using RegMask = std::bitset<num_regs>;

class ReadConfidenceTable {
 public:
  explicit ReadConfidenceTable(int initial = 2) { reset(initial); }
  void reset(int initial) {
    for (auto& c : counters_) c.value = static_cast<uint8_t>(initial);
  }
  int value(int reg) const { return counters_[reg].value; }
  void update(int reg, bool correct) { counters_[reg].update(correct); }

 private:
  std::array<SatCounter2, num_regs> counters_{};
};

enum class ReadSource { own_value, own_pending, from_predecessor, stall };

struct ReadResolution {
  ReadSource source = ReadSource::own_value;
  int src_ctx = -1;
  bool set_l = false;
};

struct ReadQuery {
  const ThreadRing& ring;
  std::span<const RegisterFile> files;  // indexed by slot
  const RegMask& d_anchor;
  const ReadConfidenceTable& confidence;
  int confidence_threshold = 2;
};

/// Decides where a thread reads `reg`. `own_pending` is true when an
/// in-flight producer in the thread's own ROB will write it.
ReadResolution resolve_read(const ReadQuery& q, int ctx, int reg, bool own_pending);

struct EarlyReadScan {
  std::optional<int> squash;  // first successor that read a conflicting value
  bool seed = false;          // that read was an LSST prediction
  std::optional<int> matched; // first successor whose early read agreed
};

/// Checks successors of `writer` after it commits reg = value. The scan
/// stops at the first successor that either read the register early or has
/// produced it itself. Under `strict` any early read (other than an LSST
/// seed, which is always value-checked) counts as a conflict.
EarlyReadScan scan_early_reads(const ThreadRing& ring, std::span<const RegisterFile> files,
                               int writer, int reg, uint32_t value, bool strict);

/// Registers whose latched inputs disagree with the predecessor's final file.
std::vector<int> input_mismatches(const RegisterFile& successor, const RegisterFile& predecessor);

/// Copies the predecessor's values into every register the successor has
/// not produced itself.
void transfer_registers(const RegisterFile& from, RegisterFile& to);

}  // namespace dsmt
