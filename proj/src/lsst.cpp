#include "dsmt/lsst.hpp"

namespace dsmt {

LsstEntry* Lsst::lookup(int reg) {
  for (auto& e : entries_)
    if (e.reg == reg) return &e;
  return nullptr;
}

const LsstEntry* Lsst::find(int reg) const { return const_cast<Lsst*>(this)->lookup(reg); }

void Lsst::observe(const Instruction& inst) {
  if (inst.op != Opcode::addi || inst.rd != inst.rs || inst.rd == 0) return;
  auto* e = lookup(inst.rd);
  if (!e) {
    entries_.push_back({inst.rd, inst.imm, 0, SatCounter2{initial_}});
    return;
  }
  if (e->stride == inst.imm) {
    e->confidence.increment();
  } else {
    e->stride = inst.imm;
    e->confidence.decrement();
  }
}

void Lsst::snapshot_bases(const std::function<uint32_t(int)>& reg_value) {
  for (auto& e : entries_) e.base = reg_value(e.reg);
}

std::optional<uint32_t> Lsst::predict(int reg, int64_t iteration) const {
  const auto* e = find(reg);
  if (!e || e->confidence.value < threshold_) return std::nullopt;
  return e->base + static_cast<uint32_t>(iteration) * static_cast<uint32_t>(e->stride);
}

void Lsst::record_outcome(int reg, bool correct) {
  auto* e = lookup(reg);
  if (correct) ++correct_;
  else ++wrong_;
  if (e) e->confidence.update(correct);
}

}  // namespace dsmt
