#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dsmt {

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ContextFlags {
  bool valid = false;        // V
  bool speculative = false;  // S
  bool joined = false;       // J: iteration complete
  int64_t iteration = 0;
};

struct SquashedSlot {
  int slot;
  int64_t iteration;
};

/// Context slots connected in a ring. Thread order runs from the head (the
/// single non-speculative context) through consecutive slots to the tail;
/// new threads are always cloned into the slot after the tail.
class ThreadRing {
 public:
  explicit ThreadRing(int slots);

  int slots() const { return static_cast<int>(flags_.size()); }
  int size() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool has_free() const { return count_ < slots(); }

  int head() const;
  int tail() const;
  int at(int position) const { return (head_ + position) % slots(); }
  /// Position of a live slot in thread order (0 = head), or -1.
  int position(int slot) const;
  std::optional<int> successor(int slot) const;
  std::optional<int> predecessor(int slot) const;

  const ContextFlags& flags(int slot) const { return flags_[slot]; }

  /// Makes `slot` the only live thread, non-speculative.
  void reset(int slot, int64_t iteration);

  /// Clones a speculative thread into the slot after the tail. Returns the
  /// slot, or nothing when every slot is live.
  std::optional<int> clone(int64_t iteration);

  void set_joined(int slot);

  struct Promotion {
    int freed;
    std::optional<int> new_head;
  };

  /// Retires the head: its slot becomes free and its successor, if any,
  /// turns non-speculative.
  Promotion retire_head();

  /// Invalidates `slot` and every younger thread, then re-clones the same
  /// slots with their iteration numbers. Throws on the head.
  std::vector<SquashedSlot> squash_from(int slot);

  /// Drops every speculative thread without reinitiation.
  std::vector<int> squash_speculative();

  /// Restarts the head on its next iteration (used when it has no successor).
  void advance_head_iteration();

  /// Checks the ring invariants; throws ProtocolError on violation.
  void check() const;

 private:
  std::vector<ContextFlags> flags_;
  int head_ = 0;
  int count_ = 0;
};

}  // namespace dsmt
