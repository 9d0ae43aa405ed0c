#include "dsmt/cache.hpp"

#include <bit>
#include <stdexcept>

namespace dsmt {

SetAssocCache::SetAssocCache(const CacheGeometry& g) {
  if (!std::has_single_bit(g.line_bytes) || g.ways == 0 || g.size_bytes % (g.line_bytes * g.ways))
    throw std::invalid_argument("bad cache geometry");
  line_shift_ = static_cast<uint32_t>(std::countr_zero(g.line_bytes));
  ways_ = g.ways;
  sets_ = g.size_bytes / (g.line_bytes * g.ways);
  lines_.resize(static_cast<size_t>(sets_) * ways_);
}

bool SetAssocCache::probe(uint32_t addr) const {
  uint32_t line = addr >> line_shift_;
  uint32_t set = line % sets_;
  for (uint32_t w = 0; w < ways_; ++w) {
    const Way& way = lines_[set * ways_ + w];
    if (way.valid && way.tag == line) return true;
  }
  return false;
}

bool SetAssocCache::access(uint32_t addr) {
  uint32_t line = addr >> line_shift_;
  uint32_t set = line % sets_;
  ++clock_;
  Way* victim = nullptr;
  for (uint32_t w = 0; w < ways_; ++w) {
    Way& way = lines_[set * ways_ + w];
    if (way.valid && way.tag == line) {
      way.last_use = clock_;
      return true;
    }
    if (!victim) victim = &way;
    else if (victim->valid && (!way.valid || way.last_use < victim->last_use)) victim = &way;
  }
  victim->tag = line;
  victim->valid = true;
  victim->last_use = clock_;
  return false;
}

CacheModel::CacheModel(const CacheConfig& cfg)
    : cfg_(cfg), l1i_(cfg.l1i), l1d_(cfg.l1d), l2_(cfg.l2) {}

int CacheModel::access(uint32_t addr, AccessKind kind) {
  bool l1_hit;
  if (kind == AccessKind::ifetch) {
    l1_hit = l1i_.access(addr);
    if (!l1_hit) ++l1i_misses_;
  } else {
    ++data_accesses_;
    l1_hit = l1d_.access(addr);
    if (!l1_hit) ++l1d_misses_;
  }
  if (l1_hit) return cfg_.l1_hit;
  return l2_.access(addr) ? cfg_.l2_hit : cfg_.memory;
}

}  // namespace dsmt
