#include "dsmt/loop_detector.hpp"

#include <algorithm>

namespace dsmt {

std::string to_string(LoopQuality q) {
  switch (q) {
    case LoopQuality::good: return "Good";
    case LoopQuality::bad: return "Bad";
    default: return "Unknown";
  }
}

bool encloses(uint32_t ob, uint32_t ot, uint32_t ib, uint32_t it) {
  return ot <= it && ob >= ib && !(ob == ib && ot == it);
}

LoopStack::Offer LoopStack::offer(uint32_t branch, uint32_t target) {
  for (const auto& e : entries_)
    if (e.branch_addr == branch && e.target_addr == target) return Offer::present;
  if (entries_.empty()) {
    entries_.push_back({branch, target, std::nullopt});
    return Offer::pushed;
  }
  const auto& t = entries_.back();
  if (encloses(branch, target, t.branch_addr, t.target_addr)) {
    entries_.push_back({branch, target, std::nullopt});
    return Offer::pushed;
  }
  if (encloses(t.branch_addr, t.target_addr, branch, target)) return Offer::inner;
  entries_.assign(1, {branch, target, std::nullopt});
  return Offer::reset;
}

void LoopStack::record_sipc(uint32_t branch, double sipc) {
  for (auto& e : entries_)
    if (e.branch_addr == branch) e.sipc = sipc;
}

bool LoopStack::all_measured() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.sipc.has_value(); });
}

std::pair<LoopRange, std::vector<LoopRange>> LoopStack::select() {
  size_t best = 0;
  for (size_t i = 1; i < entries_.size(); ++i) {
    double b = entries_[best].sipc.value_or(-1.0);
    double c = entries_[i].sipc.value_or(-1.0);
    if (c > b) best = i;
  }
  LoopRange chosen = entries_[best];
  std::vector<LoopRange> discarded;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (i != best) discarded.push_back(entries_[i]);
  entries_.assign(1, chosen);
  return {chosen, discarded};
}

ModeEvent LoopDetector::observe_branch(uint32_t pc, uint32_t target, bool taken) {
  auto it = table_.find(pc);
  if (!taken) {
    if (it == table_.end()) return {};
    it->second.iter_count = 0;
    if (it->second.loop_flag) return {ModeEventKind::loop_exit, pc};
    return {};
  }
  if (target >= pc) return {};
  if (it == table_.end() || it->second.target_addr != target) {
    LoopTableEntry e;
    e.branch_addr = pc;
    e.target_addr = target;
    e.iter_count = 1;
    table_[pc] = e;
    return {};
  }
  auto& e = it->second;
  ++e.iter_count;
  e.loop_flag = true;
  if (e.quality == LoopQuality::bad || e.discarded) return {};
  return {ModeEventKind::enter_pre_dsmt, pc};
}

LoopTableEntry* LoopDetector::entry(uint32_t pc) {
  auto it = table_.find(pc);
  return it == table_.end() ? nullptr : &it->second;
}

const LoopTableEntry* LoopDetector::entry(uint32_t pc) const {
  auto it = table_.find(pc);
  return it == table_.end() ? nullptr : &it->second;
}

std::optional<uint32_t> LoopDetector::nest_select() {
  if (stack_.entries().size() < 2 || !stack_.all_measured()) return std::nullopt;
  auto [chosen, discarded] = stack_.select();
  for (const auto& d : discarded)
    if (auto* e = entry(d.branch_addr)) {
      e->discarded = true;
      e->selected = false;
    }
  if (auto* e = entry(chosen.branch_addr)) e->selected = true;
  return chosen.branch_addr;
}

double compute_sipc(uint64_t committed, uint64_t cycles, double run_length,
                    uint64_t observed_iterations, int contexts_available, int min_run_length) {
  if (cycles == 0 || observed_iterations == 0) return 0.0;
  if (run_length < min_run_length) return 0.0;
  if (observed_iterations < static_cast<uint64_t>(contexts_available)) return 0.0;
  return static_cast<double>(committed) / static_cast<double>(cycles);
}

LoopQuality classify(double sipc, double pre_dsmt_ipc) {
  return sipc >= pre_dsmt_ipc ? LoopQuality::good : LoopQuality::bad;
}

}  // namespace dsmt
