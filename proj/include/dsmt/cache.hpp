#pragma once

#include <cstdint>
#include <vector>

#include "dsmt/config.hpp"

namespace dsmt {

/// Tag-only set-associative cache with LRU replacement.
class SetAssocCache {
 public:
  explicit SetAssocCache(const CacheGeometry& g);

  /// Looks up the line holding `addr`, filling it on a miss. Returns hit.
  bool access(uint32_t addr);
  bool probe(uint32_t addr) const;

 private:
  struct Way {
    uint32_t tag = 0;
    bool valid = false;
    uint64_t last_use = 0;
  };
  uint32_t line_shift_;
  uint32_t sets_;
  uint32_t ways_;
  uint64_t clock_ = 0;
  std::vector<Way> lines_;
};

enum class AccessKind { ifetch, data };

/// L1I/L1D backed by a unified L2; latency is a pure function of hit state.
/// Data-port arbitration lives with the core, which owns the cycle.
class CacheModel {
 public:
  explicit CacheModel(const CacheConfig& cfg);

  int access(uint32_t addr, AccessKind kind);

  uint64_t l1d_misses() const { return l1d_misses_; }
  uint64_t l1i_misses() const { return l1i_misses_; }
  uint64_t data_accesses() const { return data_accesses_; }

 private:
  CacheConfig cfg_;
  SetAssocCache l1i_, l1d_, l2_;
  uint64_t l1d_misses_ = 0, l1i_misses_ = 0, data_accesses_ = 0;
};

}  // namespace dsmt
