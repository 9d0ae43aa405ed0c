#include "dsmt/mdrt.hpp"

#include <algorithm>

namespace dsmt {

bool MdrtEntry::referenced() const {
  return std::any_of(l.begin(), l.end(), [](uint8_t b) { return b; }) ||
         std::any_of(s.begin(), s.end(), [](uint8_t b) { return b; });
}

Mdrt::Mdrt(int capacity, int slots) : capacity_(capacity), slots_(slots), table_(capacity) {}

const MdrtEntry* Mdrt::find(uint32_t addr) const {
  for (const auto& e : table_)
    if (e.valid && e.addr == addr) return &e;
  return nullptr;
}

MdrtEntry* Mdrt::lookup(uint32_t addr) {
  return const_cast<MdrtEntry*>(static_cast<const Mdrt*>(this)->find(addr));
}

bool Mdrt::can_track(uint32_t addr) const { return find(addr) || occupancy_ < capacity_; }

MdrtEntry* Mdrt::allocate(uint32_t addr) {
  if (auto* e = lookup(addr)) return e;
  for (auto& e : table_) {
    if (e.valid) continue;
    e = MdrtEntry{};
    e.valid = true;
    e.addr = addr;
    e.l.assign(slots_, 0);
    e.s.assign(slots_, 0);
    e.stored.assign(slots_, 0);
    e.loaded.assign(slots_, 0);
    e.load_conflict.assign(slots_, 0);
    ++occupancy_;
    peak_ = std::max(peak_, occupancy_);
    return &e;
  }
  return nullptr;
}

std::optional<uint32_t> Mdrt::visible_store(const ThreadRing& ring, int ctx, uint32_t addr) const {
  const MdrtEntry* e = find(addr);
  if (!e) return std::nullopt;
  for (std::optional<int> t = ctx; t; t = ring.predecessor(*t))
    if (e->s[*t]) return e->stored[*t];
  return std::nullopt;
}

bool Mdrt::record_load(int ctx, uint32_t addr, uint32_t value) {
  MdrtEntry* e = allocate(addr);
  if (!e) return false;
  if (!e->l[ctx]) {
    e->l[ctx] = 1;
    e->loaded[ctx] = value;
  } else if (e->loaded[ctx] != value) {
    e->load_conflict[ctx] = 1;
  }
  return true;
}

bool Mdrt::record_store(int ctx, uint32_t addr, uint32_t value, bool allocate_entry) {
  MdrtEntry* e = allocate_entry ? allocate(addr) : lookup(addr);
  if (!e) return !allocate_entry;
  e->s[ctx] = 1;
  e->stored[ctx] = value;
  e->value = value;
  return true;
}

MemoryScan Mdrt::scan_early_reads(const ThreadRing& ring, int writer, uint32_t addr,
                                  uint32_t value, bool strict) const {
  MemoryScan out;
  const MdrtEntry* e = find(addr);
  if (!e) return out;
  for (auto t = ring.successor(writer); t; t = ring.successor(*t)) {
    if (e->l[*t]) {
      if (strict || e->load_conflict[*t] || e->loaded[*t] != value) out.squash = *t;
      else out.matched = *t;
      return out;
    }
    if (e->s[*t]) return out;
  }
  return out;
}

void Mdrt::clear_context(int slot) {
  for (auto& e : table_) {
    if (!e.valid) continue;
    e.l[slot] = e.s[slot] = e.load_conflict[slot] = 0;
    if (!e.referenced()) {
      e.valid = false;
      --occupancy_;
    }
  }
}

void Mdrt::clear() {
  for (auto& e : table_) e.valid = false;
  occupancy_ = 0;
}

std::vector<MdrtEntry> Mdrt::entries() const {
  std::vector<MdrtEntry> out;
  for (const auto& e : table_)
    if (e.valid) out.push_back(e);
  return out;
}

}  // namespace dsmt
