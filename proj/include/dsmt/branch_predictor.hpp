#pragma once

#include <cstdint>
#include <vector>

namespace dsmt {

/// 2-bit saturating counter, states 0..3.
struct SatCounter2 {
  uint8_t value = 0;

  void increment() {
    if (value < 3) ++value;
  }
  void decrement() {
    if (value > 0) --value;
  }
  void update(bool up) { up ? increment() : decrement(); }
};

struct BranchPredictorEntry {
  uint32_t tag = 0;  // branch pc
  uint32_t target = 0;
  SatCounter2 counter;
  bool valid = false;
  uint64_t last_use = 0;
};

struct Prediction {
  bool taken = false;
  uint32_t target = 0;
  bool hit = false;
};

/// Shared BTB with per-entry 2-bit counters, LRU within each set. A miss
/// predicts not-taken; entries are allocated on the first taken resolution.
class BranchPredictor {
 public:
  BranchPredictor(int entries, int ways);

  Prediction predict(uint32_t pc);
  void update(uint32_t pc, bool taken, uint32_t target);

  const BranchPredictorEntry* find(uint32_t pc) const;

 private:
  uint32_t set_of(uint32_t pc) const { return (pc >> 2) % sets_; }
  BranchPredictorEntry* lookup(uint32_t pc);

  uint32_t sets_;
  uint32_t ways_;
  uint64_t clock_ = 0;
  std::vector<BranchPredictorEntry> table_;
};

}  // namespace dsmt
