#include "dsmt/branch_predictor.hpp"

#include <stdexcept>

namespace dsmt {

BranchPredictor::BranchPredictor(int entries, int ways) {
  if (ways <= 0 || entries < ways || entries % ways) throw std::invalid_argument("bad BTB geometry");
  ways_ = static_cast<uint32_t>(ways);
  sets_ = static_cast<uint32_t>(entries / ways);
  table_.resize(static_cast<size_t>(entries));
}

BranchPredictorEntry* BranchPredictor::lookup(uint32_t pc) {
  uint32_t set = set_of(pc);
  for (uint32_t w = 0; w < ways_; ++w) {
    auto& e = table_[set * ways_ + w];
    if (e.valid && e.tag == pc) return &e;
  }
  return nullptr;
}

const BranchPredictorEntry* BranchPredictor::find(uint32_t pc) const {
  return const_cast<BranchPredictor*>(this)->lookup(pc);
}

Prediction BranchPredictor::predict(uint32_t pc) {
  auto* e = lookup(pc);
  if (!e) return {};
  e->last_use = ++clock_;
  return {e->counter.value >= 2, e->target, true};
}

void BranchPredictor::update(uint32_t pc, bool taken, uint32_t target) {
  if (auto* e = lookup(pc)) {
    e->counter.update(taken);
    if (taken) e->target = target;
    e->last_use = ++clock_;
    return;
  }
  if (!taken) return;
  uint32_t set = set_of(pc);
  BranchPredictorEntry* victim = &table_[set * ways_];
  for (uint32_t w = 0; w < ways_; ++w) {
    auto& e = table_[set * ways_ + w];
    if (!e.valid) {
      victim = &e;
      break;
    }
    if (e.last_use < victim->last_use) victim = &e;
  }
  *victim = BranchPredictorEntry{pc, target, SatCounter2{2}, true, ++clock_};
}

}  // namespace dsmt
