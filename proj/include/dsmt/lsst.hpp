#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dsmt/branch_predictor.hpp"
#include "dsmt/isa.hpp"

namespace dsmt {

struct LsstEntry {
  int reg = 0;
  int32_t stride = 0;
  uint32_t base = 0;  // register value when full-DSMT mode began
  SatCounter2 confidence;
};

/// Loop Stride Speculation Table: strides learned from `addi rd, rd, imm`
/// during pre-DSMT, predicting rd = base + iteration * imm for clones.
class Lsst {
 public:
  explicit Lsst(int initial_confidence = 1, int threshold = 2)
      : initial_(static_cast<uint8_t>(initial_confidence)), threshold_(threshold) {}

  /// Observes one committed pre-DSMT instruction.
  void observe(const Instruction& inst);

  /// Latches each entry's base from the current register values.
  void snapshot_bases(const std::function<uint32_t(int)>& reg_value);

  std::optional<uint32_t> predict(int reg, int64_t iteration) const;

  /// Outcome of checking a clone's predicted value against the real one.
  void record_outcome(int reg, bool correct);

  const LsstEntry* find(int reg) const;
  const std::vector<LsstEntry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

  uint64_t correct() const { return correct_; }
  uint64_t wrong() const { return wrong_; }

 private:
  LsstEntry* lookup(int reg);

  std::vector<LsstEntry> entries_;
  uint8_t initial_;
  int threshold_;
  uint64_t correct_ = 0;
  uint64_t wrong_ = 0;
};

}  // namespace dsmt
