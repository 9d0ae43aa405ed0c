#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsmt/thread_ring.hpp"

namespace dsmt {

struct MdrtEntry {
  bool valid = false;
  uint32_t addr = 0;
  uint32_t value = 0;  // last value stored by any thread
  std::vector<uint8_t> l;  // per slot: loaded the word from outside its own stores
  std::vector<uint8_t> s;  // per slot: stored the word
  std::vector<uint32_t> stored;  // per slot: that thread's latest stored value
  std::vector<uint32_t> loaded;  // per slot: value its first early load observed
  std::vector<uint8_t> load_conflict;  // per slot: its early loads disagreed

  bool referenced() const;
};

struct MemoryScan {
  std::optional<int> squash;
  std::optional<int> matched;
};

/// Memory Dataflow Resolution Table: one fully associative entry per word
/// address touched by speculative threads.
class Mdrt {
 public:
  Mdrt(int capacity, int slots);

  int capacity() const { return capacity_; }
  int occupancy() const { return occupancy_; }
  int peak() const { return peak_; }

  const MdrtEntry* find(uint32_t addr) const;

  /// Value a speculative load by `ctx` sees: the nearest store in thread
  /// order from `ctx` back to the head. Nothing means read memory.
  std::optional<uint32_t> visible_store(const ThreadRing& ring, int ctx, uint32_t addr) const;

  /// Records an early load; false when the table is full and `addr` has no
  /// entry (the load must stall).
  bool record_load(int ctx, uint32_t addr, uint32_t value);

  /// Records a store; false when the table is full. With `allocate` unset
  /// only an existing entry is updated.
  bool record_store(int ctx, uint32_t addr, uint32_t value, bool allocate = true);

  /// True when a new entry could be allocated for `addr`.
  bool can_track(uint32_t addr) const;

  /// Successors of `writer` that read `addr` early. Stops at the first one
  /// holding an L or S bit.
  MemoryScan scan_early_reads(const ThreadRing& ring, int writer, uint32_t addr, uint32_t value,
                              bool strict) const;

  /// Drops every bit of `slot`, freeing entries nobody references.
  void clear_context(int slot);
  void clear();

  std::vector<MdrtEntry> entries() const;

 private:
  MdrtEntry* lookup(uint32_t addr);
  MdrtEntry* allocate(uint32_t addr);

  int capacity_;
  int slots_;
  std::vector<MdrtEntry> table_;
  int occupancy_ = 0;
  int peak_ = 0;
};

}  // namespace dsmt
