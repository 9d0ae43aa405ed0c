#include "dsmt/thread_ring.hpp"

#include <string>

namespace dsmt {

ThreadRing::ThreadRing(int slots) : flags_(static_cast<size_t>(slots)) {
  if (slots <= 0) throw std::invalid_argument("ring needs at least one slot");
}

int ThreadRing::head() const {
  if (count_ == 0) throw ProtocolError("empty ring has no head");
  return head_;
}

int ThreadRing::tail() const {
  if (count_ == 0) throw ProtocolError("empty ring has no tail");
  return at(count_ - 1);
}

int ThreadRing::position(int slot) const {
  if (!flags_[slot].valid) return -1;
  return (slot - head_ + slots()) % slots();
}

std::optional<int> ThreadRing::successor(int slot) const {
  int p = position(slot);
  if (p < 0 || p + 1 >= count_) return std::nullopt;
  return at(p + 1);
}

std::optional<int> ThreadRing::predecessor(int slot) const {
  int p = position(slot);
  if (p <= 0) return std::nullopt;
  return at(p - 1);
}

void ThreadRing::reset(int slot, int64_t iteration) {
  for (auto& f : flags_) f = {};
  head_ = slot;
  count_ = 1;
  flags_[slot] = {true, false, false, iteration};
}

std::optional<int> ThreadRing::clone(int64_t iteration) {
  if (count_ == 0) throw ProtocolError("clone without a non-speculative thread");
  if (!has_free()) return std::nullopt;
  int slot = at(count_);
  flags_[slot] = {true, true, false, iteration};
  ++count_;
  return slot;
}

void ThreadRing::set_joined(int slot) {
  if (!flags_[slot].valid) throw ProtocolError("join on an invalid context");
  flags_[slot].joined = true;
}

ThreadRing::Promotion ThreadRing::retire_head() {
  if (count_ == 0) throw ProtocolError("retire on an empty ring");
  int freed = head_;
  flags_[freed] = {};
  --count_;
  if (count_ == 0) return {freed, std::nullopt};
  head_ = (head_ + 1) % slots();
  flags_[head_].speculative = false;
  return {freed, head_};
}

std::vector<SquashedSlot> ThreadRing::squash_from(int slot) {
  int p = position(slot);
  if (p < 0) throw ProtocolError("squash of an invalid context");
  if (p == 0 || !flags_[slot].speculative)
    throw ProtocolError("the non-speculative context cannot be squashed");
  std::vector<SquashedSlot> out;
  for (int q = p; q < count_; ++q) {
    int s = at(q);
    out.push_back({s, flags_[s].iteration});
    flags_[s] = {true, true, false, flags_[s].iteration};
  }
  return out;
}

std::vector<int> ThreadRing::squash_speculative() {
  std::vector<int> out;
  for (int q = 1; q < count_; ++q) {
    int s = at(q);
    out.push_back(s);
    flags_[s] = {};
  }
  if (count_ > 0) count_ = 1;
  return out;
}

void ThreadRing::advance_head_iteration() {
  if (count_ != 1) throw ProtocolError("head can only restart itself when alone");
  flags_[head_].joined = false;
  ++flags_[head_].iteration;
}

void ThreadRing::check() const {
  int valid = 0, nonspec = 0;
  for (const auto& f : flags_) {
    valid += f.valid;
    nonspec += f.valid && !f.speculative;
  }
  if (valid != count_) throw ProtocolError("valid count disagrees with ring size");
  if (count_ > 0 && nonspec != 1) throw ProtocolError("expected exactly one non-speculative context");
  if (count_ > 0 && flags_[head_].speculative) throw ProtocolError("head is speculative");
  for (int q = 1; q < count_; ++q) {
    const auto& prev = flags_[at(q - 1)];
    const auto& cur = flags_[at(q)];
    if (!cur.valid) throw ProtocolError("gap in ring order");
    if (cur.iteration != prev.iteration + 1)
      throw ProtocolError("iteration numbers not consecutive at position " + std::to_string(q));
  }
}

}  // namespace dsmt
