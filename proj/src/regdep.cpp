#include "dsmt/regdep.hpp"

namespace dsmt {

namespace {

// Nearest predecessor of `ctx` that committed `reg`, never looking past the head.
std::optional<int> last_writer(const ReadQuery& q, int ctx, int reg) {
  for (auto p = q.ring.predecessor(ctx); p; p = q.ring.predecessor(*p))
    if (q.files[*p][reg].r) return p;
  return std::nullopt;
}

ReadResolution cross_thread(std::optional<int> src) {
  if (src) return {ReadSource::from_predecessor, *src, true};
  return {ReadSource::own_value, -1, true};
}

}  // namespace

ReadResolution resolve_read(const ReadQuery& q, int ctx, int reg, bool own_pending) {
  const RegisterCell& cell = q.files[ctx][reg];
  if (reg == 0) return {ReadSource::own_value, -1, false};
  if (own_pending) return {ReadSource::own_pending, -1, false};
  if (cell.r || cell.l) return {ReadSource::own_value, -1, false};
  if (!q.ring.flags(ctx).speculative) return {ReadSource::own_value, -1, false};

  auto pred = q.ring.predecessor(ctx);
  if (!pred) return {ReadSource::own_value, -1, true};
  const bool pred_wrote = q.files[*pred][reg].r;
  const bool pred_done = q.ring.flags(*pred).joined;

  if (q.d_anchor[reg]) {
    // level 1: the immediate predecessor is expected to produce it
    if (pred_wrote) return {ReadSource::from_predecessor, *pred, true};
    if (!pred_done) return {ReadSource::stall, *pred, false};
    // level 2: it finished without writing, search further back
    return cross_thread(last_writer(q, *pred, reg));
  }
  if (q.confidence.value(reg) < q.confidence_threshold && !pred_wrote && !pred_done)
    return {ReadSource::stall, *pred, false};
  return cross_thread(last_writer(q, ctx, reg));
}

EarlyReadScan scan_early_reads(const ThreadRing& ring, std::span<const RegisterFile> files,
                               int writer, int reg, uint32_t value, bool strict) {
  EarlyReadScan out;
  if (reg == 0) return out;
  for (auto s = ring.successor(writer); s; s = ring.successor(*s)) {
    const RegisterCell& c = files[*s][reg];
    if (c.l) {
      bool conflict = c.read_value != value || (strict && !c.lsst_seed);
      if (conflict) {
        out.squash = *s;
        out.seed = c.lsst_seed;
      } else {
        out.matched = *s;
        out.seed = c.lsst_seed;
      }
      return out;
    }
    if (c.r) return out;
  }
  return out;
}

std::vector<int> input_mismatches(const RegisterFile& successor, const RegisterFile& predecessor) {
  std::vector<int> out;
  for (int r = 1; r < num_regs; ++r)
    if (successor[r].l && successor[r].read_value != predecessor[r].value) out.push_back(r);
  return out;
}

void transfer_registers(const RegisterFile& from, RegisterFile& to) {
  for (int r = 0; r < num_regs; ++r)
    if (!to[r].r) to[r].value = from[r].value;
}

}  // namespace dsmt
