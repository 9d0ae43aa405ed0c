// Exhaustive small-instance checks of the speculation protocol against
// plain reference models. Each suite enumerates every operation sequence
// up to a fixed length.

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "dsmt/branch_predictor.hpp"
#include "dsmt/lsst.hpp"
#include "dsmt/mdrt.hpp"
#include "dsmt/regdep.hpp"
#include "dsmt/thread_ring.hpp"

using namespace dsmt;

namespace {

// Calls visit(seq) for every sequence over [0, alphabet) of length 0..max_len.
void for_each_sequence(int alphabet, int max_len, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> seq;
  std::function<void()> rec = [&] {
    visit(seq);
    if (static_cast<int>(seq.size()) == max_len) return;
    for (int a = 0; a < alphabet; ++a) {
      seq.push_back(a);
      rec();
      seq.pop_back();
    }
  };
  rec();
}

int clamp03(int v) { return std::clamp(v, 0, 3); }

}  // namespace

// ---- 2-bit counters -------------------------------------------------------

TEST(CounterProperties, SatCounterMatchesClampedSum) {
  for (int start = 0; start < 4; ++start)
    for_each_sequence(2, 10, [&](const std::vector<int>& seq) {
      SatCounter2 c{static_cast<uint8_t>(start)};
      int model = start;
      for (int up : seq) {
        c.update(up);
        model = clamp03(model + (up ? 1 : -1));
        ASSERT_EQ(c.value, model);
        ASSERT_LE(c.value, 3);
      }
    });
}

TEST(CounterProperties, BranchPredictorEntry) {
  // one pc, plus a second pc in the same set of a one-way BTB that evicts it
  for_each_sequence(3, 9, [&](const std::vector<int>& seq) {
    BranchPredictor bp(4, 1);
    std::optional<int> model;  // counter of pc 0, absent when not allocated
    for (int op : seq) {
      if (op == 2) {
        bp.update(0x10, true, 0x100);  // same set as pc 0 (4 sets, pc>>2 % 4)
        model.reset();
        continue;
      }
      bool taken = op == 1;
      bp.update(0x0, taken, 0x100);
      if (model) model = clamp03(*model + (taken ? 1 : -1));
      else if (taken) model = 2;
      const auto* e = bp.find(0x0);
      ASSERT_EQ(e != nullptr, model.has_value());
      if (e) ASSERT_EQ(e->counter.value, *model);
      Prediction p = bp.predict(0x0);
      ASSERT_EQ(p.taken, model && *model >= 2);
    }
  });
}

TEST(CounterProperties, LsstConfidence) {
  // ops: observe stride 4, observe stride 8, outcome correct, outcome wrong
  for_each_sequence(4, 8, [&](const std::vector<int>& seq) {
    Lsst t(1, 2);
    std::optional<int> conf;
    int stride = 0;
    for (int op : seq) {
      if (op < 2) {
        int imm = op == 0 ? 4 : 8;
        t.observe({Opcode::addi, 3, 3, 0, imm});
        if (!conf) {
          conf = 1;
        } else if (imm == stride) {
          conf = clamp03(*conf + 1);
        } else {
          conf = clamp03(*conf - 1);
        }
        stride = imm;
      } else {
        t.record_outcome(3, op == 2);
        if (conf) conf = clamp03(*conf + (op == 2 ? 1 : -1));
      }
      const auto* e = t.find(3);
      ASSERT_EQ(e != nullptr, conf.has_value());
      if (!e) continue;
      ASSERT_EQ(e->confidence.value, *conf);
      ASSERT_EQ(e->stride, stride);
      t.snapshot_bases([](int) { return 1000u; });
      auto p = t.predict(3, 5);
      ASSERT_EQ(p.has_value(), *conf >= 2);
      if (p) ASSERT_EQ(*p, 1000u + 5u * static_cast<uint32_t>(stride));
    }
  });
}

TEST(CounterProperties, ReadConfidenceTable) {
  for (int init = 0; init < 4; ++init)
    for_each_sequence(4, 7, [&](const std::vector<int>& seq) {
      // ops: reg 1 up/down, reg 7 up/down; registers are independent
      ReadConfidenceTable t(init);
      std::array<int, 8> model;
      model.fill(init);
      for (int op : seq) {
        int reg = op < 2 ? 1 : 7;
        bool up = op % 2 == 0;
        t.update(reg, up);
        model[reg] = clamp03(model[reg] + (up ? 1 : -1));
        for (int r = 0; r < 8; ++r) ASSERT_EQ(t.value(r), model[r]);
      }
    });
}

// ---- thread ring ----------------------------------------------------------

namespace {

struct RingModel {
  int slots = 0;
  struct Thread {
    int slot;
    int64_t iteration;
    bool joined;
  };
  std::deque<Thread> order;  // head first

  int position(int slot) const {
    for (size_t i = 0; i < order.size(); ++i)
      if (order[i].slot == slot) return static_cast<int>(i);
    return -1;
  }
};

// Ops: 0 clone, 1 retire head, 2 squash speculative, 3 restart lone head,
// 4.. squash_from(slot), then set_joined(slot).
void apply(ThreadRing& ring, RingModel& m, int op) {
  const int n = m.slots;
  if (op == 0) {
    if (m.order.empty()) {
      EXPECT_THROW(ring.clone(0), ProtocolError);
      return;
    }
    int64_t next = m.order.back().iteration + 1;
    auto got = ring.clone(next);
    if (static_cast<int>(m.order.size()) == n) {
      ASSERT_FALSE(got);
      return;
    }
    int slot = (m.order.front().slot + static_cast<int>(m.order.size())) % n;
    ASSERT_EQ(got, slot);
    m.order.push_back({slot, next, false});
  } else if (op == 1) {
    if (m.order.empty()) {
      EXPECT_THROW(ring.retire_head(), ProtocolError);
      return;
    }
    auto p = ring.retire_head();
    ASSERT_EQ(p.freed, m.order.front().slot);
    m.order.pop_front();
    ASSERT_EQ(p.new_head.has_value(), !m.order.empty());
    if (p.new_head) ASSERT_EQ(*p.new_head, m.order.front().slot);
  } else if (op == 2) {
    auto dropped = ring.squash_speculative();
    ASSERT_EQ(dropped.size(), m.order.empty() ? 0 : m.order.size() - 1);
    if (!m.order.empty()) m.order.resize(1);
  } else if (op == 3) {
    if (m.order.size() != 1) {
      EXPECT_THROW(ring.advance_head_iteration(), ProtocolError);
      return;
    }
    ring.advance_head_iteration();
    ++m.order.front().iteration;
    m.order.front().joined = false;
  } else if (op < 4 + n) {
    int slot = op - 4;
    int p = m.position(slot);
    if (p <= 0) {
      EXPECT_THROW(ring.squash_from(slot), ProtocolError);
      return;
    }
    auto sq = ring.squash_from(slot);
    ASSERT_EQ(sq.size(), m.order.size() - static_cast<size_t>(p));
    for (size_t i = static_cast<size_t>(p); i < m.order.size(); ++i) {
      ASSERT_EQ(sq[i - p].slot, m.order[i].slot);
      ASSERT_EQ(sq[i - p].iteration, m.order[i].iteration);
      m.order[i].joined = false;
    }
  } else {
    int slot = op - 4 - n;
    int p = m.position(slot);
    if (p < 0) {
      EXPECT_THROW(ring.set_joined(slot), ProtocolError);
      return;
    }
    ring.set_joined(slot);
    m.order[p].joined = true;
  }
}

void compare(const ThreadRing& ring, const RingModel& m) {
  ASSERT_EQ(ring.size(), static_cast<int>(m.order.size()));
  ASSERT_NO_THROW(ring.check());
  int nonspec = 0;
  for (int s = 0; s < m.slots; ++s) {
    int p = m.position(s);
    const auto& f = ring.flags(s);
    ASSERT_EQ(f.valid, p >= 0);
    if (p < 0) continue;
    nonspec += !f.speculative;
    ASSERT_EQ(f.speculative, p > 0);
    ASSERT_EQ(f.joined, m.order[p].joined);
    ASSERT_EQ(f.iteration, m.order[p].iteration);
    ASSERT_EQ(ring.position(s), p);
    ASSERT_EQ(ring.at(p), s);
    if (p + 1 < static_cast<int>(m.order.size())) ASSERT_EQ(ring.successor(s), m.order[p + 1].slot);
    else ASSERT_FALSE(ring.successor(s));
    if (p > 0) ASSERT_EQ(ring.predecessor(s), m.order[p - 1].slot);
    else ASSERT_FALSE(ring.predecessor(s));
  }
  if (!m.order.empty()) {
    ASSERT_EQ(nonspec, 1);
    ASSERT_EQ(ring.head(), m.order.front().slot);
    ASSERT_EQ(ring.tail(), m.order.back().slot);
  }
  for (size_t i = 1; i < m.order.size(); ++i)
    ASSERT_EQ(m.order[i].iteration, m.order[i - 1].iteration + 1);
}

}  // namespace

TEST(RingProperties, OrderIterationsAndSingleHead) {
  for (int slots = 1; slots <= 4; ++slots)
    for (int start : {0, slots - 1}) {
      const int max_len = slots <= 2 ? 6 : 5;
      for_each_sequence(4 + 2 * slots, max_len, [&](const std::vector<int>& seq) {
        ThreadRing ring(slots);
        ring.reset(start, 7);
        RingModel m{slots, {{start, 7, false}}};
        for (int op : seq) {
          apply(ring, m, op);
          compare(ring, m);
          if (::testing::Test::HasFatalFailure()) return;
        }
      });
      if (HasFatalFailure()) return;
    }
}

TEST(RingProperties, CheckRejectsBrokenOrder) {
  // a clone given a non-consecutive iteration is caught by check()
  for (int slots = 2; slots <= 4; ++slots)
    for (int gap = -1; gap <= 2; ++gap) {
      ThreadRing ring(slots);
      ring.reset(0, 0);
      ring.clone(1 + gap);
      if (gap == 0) EXPECT_NO_THROW(ring.check());
      else EXPECT_THROW(ring.check(), ProtocolError);
    }
}

// ---- register dependence --------------------------------------------------

namespace {

// Reference statement of the read rules, written over an explicit list of
// older threads (nearest first).
ReadResolution model_read(const std::vector<int>& older, const std::vector<RegisterCell>& cells,
                          const std::vector<bool>& joined, bool speculative, int ctx, int reg, bool pending,
                          bool d_anchor, int confidence) {
  if (reg == 0 || pending || cells[ctx].r || cells[ctx].l || !speculative) {
    return {pending && reg != 0 ? ReadSource::own_pending : ReadSource::own_value, -1, false};
  }
  if (older.empty()) return {ReadSource::own_value, -1, true};
  auto writer_from = [&](size_t first) -> ReadResolution {
    for (size_t i = first; i < older.size(); ++i)
      if (cells[older[i]].r) return {ReadSource::from_predecessor, older[i], true};
    return {ReadSource::own_value, -1, true};
  };
  const int pred = older[0];
  if (d_anchor) {
    if (cells[pred].r) return {ReadSource::from_predecessor, pred, true};
    if (!joined[pred]) return {ReadSource::stall, pred, false};
    return writer_from(1);
  }
  if (confidence < 2 && !cells[pred].r && !joined[pred]) return {ReadSource::stall, pred, false};
  return writer_from(0);
}

}  // namespace

TEST(RegdepProperties, ResolveReadMatchesModel) {
  // ring of up to 4 threads; per thread the (r, l) bits and the J bit of
  // one register; every reader, anchor, confidence and pending state.
  for (int slots = 1; slots <= 4; ++slots)
    for (int live = 1; live <= slots; ++live) {
      ThreadRing ring(slots);
      ring.reset(slots - 1, 0);  // head at the last slot so order wraps
      for (int i = 1; i < live; ++i) ring.clone(i);
      const int states = 1 << (3 * live);
      for (int bits = 0; bits < states; ++bits) {
        std::vector<RegisterFile> files(slots);
        std::vector<RegisterCell> cells(slots);
        std::vector<bool> joined(slots);
        ThreadRing r = ring;
        for (int p = 0; p < live; ++p) {
          int s = ring.at(p);
          int b = bits >> (3 * p);
          cells[s].r = b & 1;
          cells[s].l = b & 2;
          joined[s] = b & 4;
          if (joined[s]) r.set_joined(s);
        }
        for (int reg : {0, 5}) {
          for (int s = 0; s < slots; ++s) files[s][reg] = cells[s];
          for (int p = 0; p < live; ++p) {
            int ctx = ring.at(p);
            std::vector<int> older;
            for (int q = p - 1; q >= 0; --q) older.push_back(ring.at(q));
            for (int d = 0; d < 2; ++d)
              for (int conf = 0; conf < 4; ++conf)
                for (int pending = 0; pending < 2; ++pending) {
                  RegMask anchor;
                  anchor[reg] = d;
                  ReadConfidenceTable table(conf);
                  ReadQuery q{r, files, anchor, table, 2};
                  auto got = resolve_read(q, ctx, reg, pending);
                  auto want = model_read(older, cells, joined, r.flags(ctx).speculative, ctx, reg,
                                         pending, d, conf);
                  ASSERT_EQ(got.source, want.source) << "bits " << bits << " reg " << reg << " pos " << p;
                  ASSERT_EQ(got.set_l, want.set_l);
                  if (want.source == ReadSource::from_predecessor || want.source == ReadSource::stall)
                    ASSERT_EQ(got.src_ctx, want.src_ctx);
                }
          }
        }
      }
    }
}

TEST(RegdepProperties, EarlyReadScanMatchesModel) {
  // successor states: 0 untouched, 1 redefined, 2 read match, 3 read
  // mismatch, 4 seed match, 5 seed mismatch, 6 read mismatch then redefined
  constexpr int kinds = 7;
  for (int live = 1; live <= 4; ++live) {
    ThreadRing ring(4);
    ring.reset(2, 0);
    for (int i = 1; i < live; ++i) ring.clone(i);
    int combos = 1;
    for (int i = 0; i < live; ++i) combos *= kinds;
    for (int c = 0; c < combos; ++c) {
      std::vector<RegisterFile> files(4);
      std::vector<int> kind(live);
      for (int p = 0, x = c; p < live; ++p, x /= kinds) {
        kind[p] = x % kinds;
        RegisterCell& cell = files[ring.at(p)][3];
        cell.r = kind[p] == 1 || kind[p] == 6;
        cell.l = kind[p] >= 2;
        cell.lsst_seed = kind[p] == 4 || kind[p] == 5;
        cell.read_value = (kind[p] == 2 || kind[p] == 4) ? 42 : 41;
      }
      for (int w = 0; w < live; ++w)
        for (int strict = 0; strict < 2; ++strict) {
          std::optional<int> squash, matched;
          bool seed = false;
          for (int p = w + 1; p < live; ++p) {
            int k = kind[p];
            if (k >= 2) {
              bool is_seed = k == 4 || k == 5;
              bool mismatch = k == 3 || k == 5 || k == 6;
              seed = is_seed;
              if (mismatch || (strict && !is_seed)) squash = ring.at(p);
              else matched = ring.at(p);
              break;
            }
            if (k == 1) break;
          }
          auto got = scan_early_reads(ring, files, ring.at(w), 3, 42, strict);
          ASSERT_EQ(got.squash, squash);
          ASSERT_EQ(got.matched, matched);
          if (squash || matched) ASSERT_EQ(got.seed, seed);
        }
    }
  }
}

TEST(RegdepProperties, TransferSkipsExactlyOwnResults) {
  for (int mask = 0; mask < 256; ++mask) {
    RegisterFile from{}, to{};
    for (int r = 0; r < 8; ++r) {
      from[r].value = 100 + r;
      to[r].value = 200 + r;
      to[r].r = (mask >> r) & 1;
    }
    transfer_registers(from, to);
    for (int r = 0; r < 8; ++r) ASSERT_EQ(to[r].value, ((mask >> r) & 1) ? 200u + r : 100u + r);
  }
}

// ---- MDRT -----------------------------------------------------------------

namespace {

struct MdrtModel {
  struct Word {
    std::array<bool, 4> l{}, s{}, conflict{};
    std::array<uint32_t, 4> stored{}, loaded{};
    uint32_t value = 0;
    bool referenced() const {
      for (int i = 0; i < 4; ++i)
        if (l[i] || s[i]) return true;
      return false;
    }
  };
  int capacity = 0;
  std::map<uint32_t, Word> words;

  bool full_for(uint32_t a) const { return !words.count(a) && static_cast<int>(words.size()) >= capacity; }
};

}  // namespace

TEST(MdrtProperties, SingleEntryPerAddressAndStallOnFull) {
  // ops: load/store by 4 contexts on 8 addresses, plus clearing a context
  constexpr int ctxs = 4, addrs = 8;
  constexpr int access_ops = 2 * ctxs * addrs;
  ThreadRing ring(ctxs);
  ring.reset(1, 0);
  for (int i = 1; i < ctxs; ++i) ring.clone(i);
  std::vector<int> older_first;  // thread order
  for (int p = 0; p < ctxs; ++p) older_first.push_back(ring.at(p));

  for (int capacity : {1, 2, 3, 8}) {
    for_each_sequence(access_ops + ctxs, 3, [&](const std::vector<int>& seq) {
      Mdrt m(capacity, ctxs);
      MdrtModel model{capacity, {}};
      for (size_t step = 0; step < seq.size(); ++step) {
        int op = seq[step];
        const uint32_t value = static_cast<uint32_t>(step % 2);
        if (op >= access_ops) {
          int ctx = op - access_ops;
          m.clear_context(ctx);
          for (auto it = model.words.begin(); it != model.words.end();) {
            auto& w = it->second;
            w.l[ctx] = w.s[ctx] = w.conflict[ctx] = false;
            it = w.referenced() ? std::next(it) : model.words.erase(it);
          }
        } else {
          bool store = op >= ctxs * addrs;
          int rest = op % (ctxs * addrs);
          int ctx = rest / addrs;
          uint32_t addr = 0x1000u + 4u * static_cast<uint32_t>(rest % addrs);
          bool expect_ok = !model.full_for(addr);
          bool ok = store ? m.record_store(ctx, addr, value) : m.record_load(ctx, addr, value);
          ASSERT_EQ(ok, expect_ok);
          ASSERT_EQ(m.can_track(addr), !model.full_for(addr) || ok);
          if (ok) {
            auto& w = model.words[addr];
            if (store) {
              w.s[ctx] = true;
              w.stored[ctx] = value;
              w.value = value;
            } else if (!w.l[ctx]) {
              w.l[ctx] = true;
              w.loaded[ctx] = value;
            } else if (w.loaded[ctx] != value) {
              w.conflict[ctx] = true;
            }
          }
        }
        // structure
        ASSERT_EQ(m.occupancy(), static_cast<int>(model.words.size()));
        ASSERT_LE(m.occupancy(), capacity);
        auto entries = m.entries();
        std::vector<uint32_t> seen;
        for (const auto& e : entries) seen.push_back(e.addr);
        std::sort(seen.begin(), seen.end());
        ASSERT_TRUE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
        for (const auto& e : entries) {
          auto it = model.words.find(e.addr);
          ASSERT_NE(it, model.words.end());
          for (int c = 0; c < ctxs; ++c) {
            ASSERT_EQ(static_cast<bool>(e.l[c]), it->second.l[c]);
            ASSERT_EQ(static_cast<bool>(e.s[c]), it->second.s[c]);
          }
        }
        // dataflow: visible store and early-read scan on every address
        for (int a = 0; a < addrs; ++a) {
          uint32_t addr = 0x1000u + 4u * static_cast<uint32_t>(a);
          auto it = model.words.find(addr);
          for (int p = 0; p < ctxs; ++p) {
            int ctx = older_first[p];
            std::optional<uint32_t> vis;
            if (it != model.words.end())
              for (int q = p; q >= 0 && !vis; --q)
                if (it->second.s[older_first[q]]) vis = it->second.stored[older_first[q]];
            ASSERT_EQ(m.visible_store(ring, ctx, addr), vis);
            for (int strict = 0; strict < 2; ++strict)
              for (uint32_t wv : {0u, 1u}) {
                std::optional<int> squash, matched;
                if (it != model.words.end())
                  for (int q = p + 1; q < ctxs; ++q) {
                    int t = older_first[q];
                    const auto& w = it->second;
                    if (w.l[t]) {
                      if (strict || w.conflict[t] || w.loaded[t] != wv) squash = t;
                      else matched = t;
                      break;
                    }
                    if (w.s[t]) break;
                  }
                auto got = m.scan_early_reads(ring, ctx, addr, wv, strict);
                ASSERT_EQ(got.squash, squash);
                ASSERT_EQ(got.matched, matched);
              }
          }
        }
        ASSERT_GE(m.peak(), m.occupancy());
      }
    });
    if (HasFatalFailure()) return;
  }
}
