#include "dsmt/core.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include "dsmt/branch_predictor.hpp"
#include "dsmt/cache.hpp"
#include "dsmt/fetch.hpp"
#include "dsmt/mdrt.hpp"
#include "dsmt/regdep.hpp"

namespace dsmt {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::pre_dsmt: return "PreDsmt";
    case Mode::full_dsmt: return "FullDsmt";
    default: return "NonDsmt";
  }
}

std::string to_string(SquashReason r) {
  switch (r) {
    case SquashReason::register_early_read: return "RegisterEarlyRead";
    case SquashReason::memory_early_read: return "MemoryEarlyRead";
    case SquashReason::lsst_mispredict: return "LsstMispredict";
    default: return "ControlMispeculation";
  }
}

std::string to_string(EndReason r) {
  switch (r) {
    case EndReason::halted: return "halted";
    case EndReason::max_cycles: return "max_cycles";
    case EndReason::deadlock: return "deadlock";
    default: return "fault";
  }
}

uint64_t CoreStats::total_squashes() const {
  uint64_t n = 0;
  for (auto s : squashes) n += s;
  return n;
}

namespace {

constexpr uint64_t no_producer = 0;
constexpr uint64_t watchdog_cycles = 200'000;

struct Operand {
  bool ready = true;
  uint32_t value = 0;
  uint64_t ready_cycle = 0;
  uint64_t producer = no_producer;
};

enum class Stage : uint8_t { waiting, in_rs, mem_wait, done };

struct RobEntry {
  uint64_t seq = 0;
  uint32_t pc = 0;
  Instruction inst;
  FuTiming timing{};
  int dest = -1;
  SourceRegs srcs;
  std::array<Operand, 2> src{};
  uint32_t predicted_next = 0;
  Stage stage = Stage::waiting;
  uint64_t ready_cycle = 0;
  uint64_t addr_cycle = 0;
  ExecOutcome out;
};

struct Fetched {
  uint32_t pc;
  Instruction inst;
  uint32_t predicted_next;
  uint64_t cycle;
};

struct LoadRecord {
  uint64_t seq;
  uint32_t addr;
  uint32_t value;
};

struct Context {
  std::deque<RobEntry> rob;
  std::deque<Fetched> fetch_buf;
  std::array<uint64_t, num_regs> rename{};
  uint64_t next_seq = 1;
  uint32_t fetch_pc = 0;
  uint64_t fetch_ready = 0;
  bool fetch_stopped = false;
  std::deque<StoreRecord> store_buf;  // locally committed, program order
  std::vector<LoadRecord> load_log;   // loads whose value came from outside the thread
  uint64_t local_commits = 0;
  uint64_t promoted_cycle = ~0ull;
  bool halted = false;

  int iq_count() const {
    return static_cast<int>(std::count_if(rob.begin(), rob.end(),
                                          [](const RobEntry& e) { return e.stage == Stage::waiting; }));
  }
  int lsq_count() const {
    return static_cast<int>(std::count_if(rob.begin(), rob.end(), [](const RobEntry& e) {
      return is_load(e.inst.op) || is_store(e.inst.op);
    }));
  }
  RobEntry* find(uint64_t seq) {
    if (rob.empty() || seq < rob.front().seq || seq > rob.back().seq) return nullptr;
    return &rob[seq - rob.front().seq];
  }
};

bool is_unpipelined(FuClass c) { return c == FuClass::int_div || c == FuClass::fp_div; }

}  // namespace

struct Core::Impl {
  SimConfig cfg;
  const Program& prog;
  std::vector<std::optional<Instruction>> decoded;
  Memory memory;
  StoreTrace trace;
  CoreStats stats;
  std::ostream* debug = nullptr;

  CacheModel cache;
  BranchPredictor bp;
  LoopDetector loops;
  ThreadRing ring;
  Lsst lsst;
  Mdrt mdrt;
  ReadConfidenceTable rrct;
  std::vector<Context> ctx;
  std::vector<RegisterFile> files;

  uint64_t now = 0;
  std::optional<EndReason> end;
  uint64_t last_progress = 0;

  // shared execution resources
  std::array<int, num_fu_classes> rs_used{};
  std::array<int, num_fu_classes> starts{};
  std::array<std::vector<uint64_t>, num_fu_classes> unit_busy;
  int ports_used = 0;

  // thread creation state
  Mode mode = Mode::non_dsmt;
  uint32_t continuation = 0;
  uint32_t active_branch = 0;
  RegMask d_anchor, r_anchor;
  int pre_iterations = 0;
  uint64_t pre_start_cycle = 0;
  uint64_t pre_start_committed = 0;
  bool measuring = false;
  uint64_t ep_start_cycle = 0;
  uint64_t ep_start_committed = 0;
  uint64_t ep_iterations = 0;

  Impl(const SimConfig& c, const Program& p, const ArchState& start)
      : cfg(c),
        prog(p),
        memory(start.memory),
        cache(c.cache),
        bp(c.pipeline.btb_entries, c.pipeline.btb_ways),
        ring(c.context_count),
        lsst(c.lsst_initial_confidence, c.lsst_threshold),
        mdrt(c.mdrt_capacity, c.context_count),
        rrct(c.read_confidence_initial),
        ctx(c.context_count),
        files(c.context_count) {
    decoded.reserve(p.words.size());
    for (uint32_t w : p.words) {
      try {
        decoded.emplace_back(decode(w));
      } catch (const DecodeError&) {
        decoded.emplace_back(std::nullopt);
      }
    }
    for (int k = 0; k < num_fu_classes; ++k)
      if (is_unpipelined(static_cast<FuClass>(k)))
        unit_busy[k].assign(cfg.pipeline.fu_counts[k], 0);
    ring.reset(0, 0);
    for (int r = 0; r < num_regs; ++r) files[0][r].value = start.reg(r);
    ctx[0].fetch_pc = start.pc;
    stats.committed = start.committed_count;
    if (start.halted) {
      ctx[0].halted = true;
      end = EndReason::halted;
    }
  }

  int head() const { return ring.head(); }
  bool speculative(int c) const { return ring.flags(c).speculative; }
  const Instruction* inst_at(uint32_t pc) const {
    if (!prog.contains(pc)) return nullptr;
    const auto& d = decoded[(pc - prog.base_address) / 4u];
    return d ? &*d : nullptr;
  }
  bool in_loop(uint32_t pc) const { return pc >= continuation && pc <= active_branch; }

  std::vector<int> order() const {
    std::vector<int> out;
    for (int p = 0; p < ring.size(); ++p) out.push_back(ring.at(p));
    return out;
  }

  void cycle();
  void commit_stage();
  void commit_head(int h);
  void commit_speculative(int c);
  void drain(int h);
  void execute_stage();
  void memory_stage();
  void issue_stage();
  void dispatch_stage();
  void fetch_stage();
  void tciu_stage();

  bool fu_available(FuClass cls) const;
  void start_execution(int c, RobEntry& e);
  void broadcast(Context& cx, uint64_t seq, uint32_t value, uint64_t ready);
  void write_register(int c, const RobEntry& e);
  void memory_write(int writer, uint32_t addr, uint32_t value);
  void flush_younger(int c, uint64_t committed_seq);
  void kill(int c);
  void init_clone(int c, int64_t iteration);
  void squash_from(int c, SquashReason reason);
  void reset_bits(int c);
  void enter_pre_dsmt(uint32_t branch);
  void begin_full_dsmt(int h, uint64_t committed_seq);
  void complete_head(int h);
  void finish_measurement();
  void exit_dsmt();
  void credit(uint64_t n);
};

void Core::Impl::cycle() {
  if (end) return;
  ports_used = 0;
  starts.fill(0);
  commit_stage();
  if (!end) {
    execute_stage();
    memory_stage();
    issue_stage();
    dispatch_stage();
    fetch_stage();
    tciu_stage();
  }
  stats.data_port_grants += ports_used;
  stats.mdrt_peak = std::max(stats.mdrt_peak, mdrt.peak());
  stats.lsst_correct = lsst.correct();
  stats.lsst_wrong = lsst.wrong();
  ++now;
  stats.cycles = now;
  if (end) return;
  if (now >= cfg.max_cycles) end = EndReason::max_cycles;
  else if (now - last_progress > watchdog_cycles) end = EndReason::deadlock;
}

bool Core::Impl::fu_available(FuClass cls) const {
  int k = static_cast<int>(cls);
  if (is_unpipelined(cls))
    return std::any_of(unit_busy[k].begin(), unit_busy[k].end(), [&](uint64_t b) { return b <= now; });
  return starts[k] < cfg.pipeline.fu_counts[k];
}

void Core::Impl::broadcast(Context& cx, uint64_t seq, uint32_t value, uint64_t ready) {
  for (auto& e : cx.rob) {
    if (e.seq <= seq) continue;
    for (auto& op : e.src)
      if (!op.ready && op.producer == seq) {
        op.ready = true;
        op.value = value;
        op.ready_cycle = ready;
      }
  }
}

void Core::Impl::start_execution(int c, RobEntry& e) {
  int k = static_cast<int>(e.timing.cls);
  if (is_unpipelined(e.timing.cls)) {
    for (auto& b : unit_busy[k])
      if (b <= now) {
        b = now + e.timing.latency;
        break;
      }
  } else {
    ++starts[k];
  }
  e.out = evaluate(e.inst, e.pc, e.src[0].value, e.src[1].value);
  if (is_load(e.inst.op) && e.out.trap == Trap::none) {
    e.stage = Stage::mem_wait;
    e.addr_cycle = now + e.timing.latency;
    return;
  }
  e.stage = Stage::done;
  e.ready_cycle = now + e.timing.latency;
  if (e.dest >= 0 && e.out.trap == Trap::none) broadcast(ctx[c], e.seq, e.out.result, e.ready_cycle);
}

void Core::Impl::execute_stage() {
  for (int c : order())
    for (auto& e : ctx[c].rob)
      if (e.stage == Stage::in_rs && fu_available(e.timing.cls)) {
        --rs_used[static_cast<int>(e.timing.cls)];
        start_execution(c, e);
      }
}

void Core::Impl::memory_stage() {
  for (int c : order()) {
    Context& x = ctx[c];
    for (size_t i = 0; i < x.rob.size(); ++i) {
      RobEntry& e = x.rob[i];
      if (e.stage != Stage::mem_wait || e.addr_cycle > now) continue;
      const uint32_t addr = e.out.mem_addr;
      bool blocked = false;
      const RobEntry* fwd = nullptr;
      for (size_t j = 0; j < i; ++j) {
        const RobEntry& s = x.rob[j];
        if (!is_store(s.inst.op)) continue;
        if (s.stage != Stage::done) {
          blocked = true;
          break;
        }
        if (s.out.mem_addr == addr) fwd = &s;
      }
      if (blocked) continue;
      uint32_t value = 0;
      uint64_t ready = now + 1;
      auto buffered = std::find_if(x.store_buf.rbegin(), x.store_buf.rend(),
                                   [&](const StoreRecord& s) { return s.addr == addr; });
      if (fwd) {
        value = fwd->out.result;
      } else if (buffered != x.store_buf.rend()) {
        value = buffered->value;
      } else {
        if (ports_used >= cfg.cache.data_ports) continue;
        if (speculative(c)) {
          auto pred = ring.predecessor(c);
          auto seen = pred ? mdrt.visible_store(ring, *pred, addr) : std::nullopt;
          auto it = memory.find(addr);
          value = seen ? *seen : (it == memory.end() ? 0u : it->second);
          if (!mdrt.record_load(c, addr, value)) continue;
          x.load_log.push_back({e.seq, addr, value});
        } else {
          auto it = memory.find(addr);
          value = it == memory.end() ? 0u : it->second;
        }
        ++ports_used;
        ready = now + cache.access(addr, AccessKind::data);
      }
      e.out.result = value;
      e.stage = Stage::done;
      e.ready_cycle = ready;
      if (e.dest >= 0) broadcast(x, e.seq, value, ready);
    }
  }
}

void Core::Impl::issue_stage() {
  for (int c : order()) {
    int issued = 0;
    for (auto& e : ctx[c].rob) {
      if (issued >= cfg.pipeline.issue_width_per_context) break;
      if (e.stage != Stage::waiting) continue;
      bool ready = true;
      for (int i = 0; i < e.srcs.count; ++i)
        ready = ready && e.src[i].ready && e.src[i].ready_cycle <= now;
      if (!ready) continue;
      int k = static_cast<int>(e.timing.cls);
      if (fu_available(e.timing.cls)) {
        start_execution(c, e);
      } else if (rs_used[k] < cfg.pipeline.rs_counts[k]) {
        e.stage = Stage::in_rs;
        ++rs_used[k];
      } else {
        continue;
      }
      ++issued;
    }
  }
}

void Core::Impl::dispatch_stage() {
  const bool dsmt = mode == Mode::full_dsmt;
  for (int c : order()) {
    Context& x = ctx[c];
    const bool spec = dsmt && speculative(c);
    int n = 0;
    while (!x.fetch_buf.empty() && n < cfg.pipeline.fetch_width_per_port) {
      const Fetched& f = x.fetch_buf.front();
      if (f.cycle >= now) break;
      if (static_cast<int>(x.rob.size()) >= cfg.pipeline.rob_size) break;
      if (x.iq_count() >= cfg.pipeline.iq_size) break;
      const bool mem_op = is_load(f.inst.op) || is_store(f.inst.op);
      if (mem_op && x.lsq_count() >= cfg.pipeline.lsq_size) break;

      RobEntry e;
      e.srcs = source_regs(f.inst);
      std::array<bool, 2> latch{false, false};
      bool stall = false;
      for (int i = 0; i < e.srcs.count; ++i) {
        int reg = e.srcs.regs[i];
        Operand& op = e.src[i];
        if (reg == 0) continue;
        if (uint64_t p = x.rename[reg]; p != no_producer) {
          RobEntry* pe = x.find(p);
          if (pe && pe->stage == Stage::done && pe->out.trap == Trap::none) {
            op.value = pe->out.result;
            op.ready_cycle = pe->ready_cycle;
          } else {
            op.ready = false;
            op.producer = p;
          }
          continue;
        }
        const RegisterCell& cell = files[c][reg];
        if (spec && cell.lsst_seed && !cell.l && !cell.r) {
          op.value = cell.value;
          latch[i] = true;
        } else if (spec) {
          ReadQuery q{ring, files, d_anchor, rrct, cfg.read_confidence_threshold};
          ReadResolution r = resolve_read(q, c, reg, false);
          if (r.source == ReadSource::stall) {
            stall = true;
            break;
          }
          op.value = r.source == ReadSource::from_predecessor ? files[r.src_ctx][reg].value
                                                              : files[c][reg].value;
          latch[i] = r.set_l;
        } else {
          op.value = files[c][reg].value;
        }
      }
      if (stall) break;
      for (int i = 0; i < e.srcs.count; ++i) {
        if (!latch[i]) continue;
        RegisterCell& cell = files[c][e.srcs.regs[i]];
        if (cell.l) continue;
        cell.l = true;
        cell.read_value = e.src[i].value;
        cell.value = e.src[i].value;
      }
      e.seq = x.next_seq++;
      e.pc = f.pc;
      e.inst = f.inst;
      e.timing = classify_fu(f.inst, cfg.pipeline.latencies);
      e.dest = dest_reg(f.inst);
      e.predicted_next = f.predicted_next;
      if (e.dest >= 0) x.rename[e.dest] = e.seq;
      x.rob.push_back(e);
      x.fetch_buf.pop_front();
      ++n;
    }
  }
}

void Core::Impl::fetch_stage() {
  std::vector<FetchCandidate> cands;
  for (int c : order()) {
    const Context& x = ctx[c];
    if (x.halted || x.fetch_stopped || x.fetch_ready > now || ring.flags(c).joined) continue;
    if (static_cast<int>(x.fetch_buf.size()) >= cfg.pipeline.fetch_buffer_size) continue;
    cands.push_back({c, speculative(c), static_cast<int>(x.fetch_buf.size()) + x.iq_count()});
  }
  if (cands.empty()) return;
  const uint32_t line_bytes = cfg.cache.l1i.line_bytes;
  for (int c : fetch_select(cands, cfg.pipeline.fetch_ports, cfg.fetch_policy)) {
    Context& x = ctx[c];
    ++stats.fetch_port_grants;
    uint32_t line = ~0u;
    for (int n = 0; n < cfg.pipeline.fetch_width_per_port &&
                    static_cast<int>(x.fetch_buf.size()) < cfg.pipeline.fetch_buffer_size;
         ++n) {
      const uint32_t pc = x.fetch_pc;
      const Instruction* inst = inst_at(pc);
      if (!inst) {
        x.fetch_stopped = true;  // wrong path ran off the image; a redirect restarts fetch
        break;
      }
      if (pc / line_bytes != line) {
        line = pc / line_bytes;
        int lat = cache.access(pc, AccessKind::ifetch);
        if (lat > cfg.cache.l1_hit) {
          x.fetch_ready = now + lat;
          break;
        }
      }
      uint32_t next = pc + 4;
      bool stop = false;
      if (mode == Mode::full_dsmt && pc == active_branch) {
        next = continuation;
        stop = true;
      } else if (inst->op == Opcode::j) {
        next = branch_target(*inst, pc);
      } else if (is_conditional(inst->op)) {
        if (bp.predict(pc).taken) next = branch_target(*inst, pc);
      } else if (inst->op == Opcode::halt) {
        stop = true;
      }
      x.fetch_buf.push_back({pc, *inst, next, now});
      x.fetch_pc = next;
      if (stop) {
        x.fetch_stopped = true;
        break;
      }
      if (next != pc + 4) break;
    }
  }
}

void Core::Impl::tciu_stage() {
  if (mode != Mode::full_dsmt) return;
  if (measuring && now + 1 - ep_start_cycle >= cfg.measurement_window) {
    finish_measurement();
    const LoopTableEntry* e = loops.entry(active_branch);
    if (e && (e->quality == LoopQuality::bad || e->discarded)) {
      exit_dsmt();
      return;
    }
  }
  while (ring.has_free()) {
    int64_t iteration = ring.flags(ring.tail()).iteration + 1;
    auto slot = ring.clone(iteration);
    init_clone(*slot, iteration);
    ++stats.clones;
  }
}

void Core::Impl::credit(uint64_t n) {
  stats.committed += n;
  stats.committed_detailed += n;
  if (mode == Mode::full_dsmt) stats.committed_in_dsmt += n;
  last_progress = now;
}

void Core::Impl::commit_stage() {
  for (int c : order()) {
    if (!ring.flags(c).valid || ctx[c].promoted_cycle == now) continue;
    if (c == ring.head()) commit_head(c);
    else if (mode == Mode::full_dsmt) commit_speculative(c);
    if (end) return;
  }
}

void Core::Impl::memory_write(int writer, uint32_t addr, uint32_t value) {
  memory[addr] = value;
  trace.push_back({addr, value});
  mdrt.record_store(writer, addr, value, false);
  if (mode != Mode::full_dsmt) return;
  MemoryScan scan = mdrt.scan_early_reads(ring, writer, addr, value, cfg.strict_lbit_squash);
  if (scan.squash) squash_from(*scan.squash, SquashReason::memory_early_read);
}

void Core::Impl::drain(int h) {
  Context& x = ctx[h];
  while (!x.store_buf.empty() && ports_used < cfg.cache.data_ports) {
    StoreRecord s = x.store_buf.front();
    x.store_buf.pop_front();
    ++ports_used;
    cache.access(s.addr, AccessKind::data);
    memory_write(h, s.addr, s.value);
  }
}

void Core::Impl::write_register(int c, const RobEntry& e) {
  RegisterFile& f = files[c];
  for (int i = 0; i < e.srcs.count; ++i) {
    int s = e.srcs.regs[i];
    if (s > 0 && !f[s].r && r_anchor[s]) f[s].d = true;
  }
  if (e.dest < 0) return;
  f[e.dest].value = e.out.result;
  f[e.dest].r = true;
  if (mode != Mode::full_dsmt) return;
  EarlyReadScan scan =
      scan_early_reads(ring, files, c, e.dest, e.out.result, cfg.strict_lbit_squash);
  if (scan.matched && !scan.seed) rrct.update(e.dest, true);
  if (scan.squash) {
    if (scan.seed) lsst.record_outcome(e.dest, false);
    else rrct.update(e.dest, false);
    squash_from(*scan.squash, scan.seed ? SquashReason::lsst_mispredict
                                        : SquashReason::register_early_read);
  }
}

void Core::Impl::commit_head(int h) {
  Context& x = ctx[h];
  drain(h);
  if (ring.flags(h).joined) {
    if (x.store_buf.empty()) complete_head(h);
    return;
  }
  for (int n = 0; n < cfg.pipeline.issue_width_per_context && !x.rob.empty(); ++n) {
    RobEntry& front = x.rob.front();
    if (front.stage != Stage::done || front.ready_cycle > now) break;
    if (front.out.trap != Trap::none) {
      stats.fault = std::string(front.out.trap == Trap::divide_by_zero ? "division by zero"
                                                                       : "misaligned access") +
                    " committed at pc " + std::to_string(front.pc);
      end = EndReason::fault;
      return;
    }
    const bool store = is_store(front.inst.op);
    if (store && (!x.store_buf.empty() || ports_used >= cfg.cache.data_ports)) break;
    const bool loop_branch = mode != Mode::non_dsmt && front.pc == active_branch;
    if (loop_branch && !x.store_buf.empty()) break;

    RobEntry e = std::move(front);
    x.rob.pop_front();
    if (store) {
      ++ports_used;
      cache.access(e.out.mem_addr, AccessKind::data);
      memory_write(h, e.out.mem_addr, e.out.result);
    }
    write_register(h, e);
    if (e.dest >= 0 && x.rename[e.dest] == e.seq) x.rename[e.dest] = no_producer;
    credit(1);
    if (e.inst.op == Opcode::halt) {
      x.halted = true;
      ctx[h].fetch_pc = e.pc;
      end = EndReason::halted;
      return;
    }
    const bool redirect = e.out.next_pc != e.predicted_next;
    ModeEvent ev;
    if (is_branch(e.inst.op)) {
      uint32_t target = branch_target(e.inst, e.pc);
      bp.update(e.pc, e.out.taken, target);
      ++stats.branches;
      if (redirect) ++stats.mispredicts;
      ev = loops.observe_branch(e.pc, target, e.out.taken);
    }
    if (mode == Mode::non_dsmt) {
      if (ev.kind == ModeEventKind::enter_pre_dsmt && cfg.context_count > 1)
        enter_pre_dsmt(ev.branch_addr);
    } else if (mode == Mode::pre_dsmt) {
      lsst.observe(e.inst);
      if (loop_branch && e.out.taken) {
        ++pre_iterations;
        for (int r = 0; r < num_regs; ++r) {
          d_anchor[r] = files[h][r].d;
          r_anchor[r] = files[h][r].r;
        }
        reset_bits(h);
        if (pre_iterations >= cfg.pre_dsmt_iterations) {
          begin_full_dsmt(h, e.seq);
          return;
        }
      } else if (loop_branch || !in_loop(e.out.next_pc)) {
        mode = Mode::non_dsmt;
      }
    } else {
      if (loop_branch && e.out.taken) {
        complete_head(h);
        return;
      }
      if (loop_branch || !in_loop(e.out.next_pc)) exit_dsmt();
    }
    if (redirect) {
      flush_younger(h, e.seq);
      x.fetch_pc = e.out.next_pc;
      break;
    }
  }
}

void Core::Impl::commit_speculative(int c) {
  Context& x = ctx[c];
  if (ring.flags(c).joined) return;
  for (int n = 0; n < cfg.pipeline.issue_width_per_context && !x.rob.empty(); ++n) {
    RobEntry& front = x.rob.front();
    if (front.stage != Stage::done || front.ready_cycle > now) break;
    if (front.out.trap != Trap::none || front.inst.op == Opcode::halt) break;
    const bool loop_branch = front.pc == active_branch;
    if (loop_branch ? !front.out.taken : !in_loop(front.out.next_pc)) break;
    const bool store = is_store(front.inst.op);
    if (store && !mdrt.record_store(c, front.out.mem_addr, front.out.result)) break;

    RobEntry e = std::move(front);
    x.rob.pop_front();
    ++x.local_commits;
    last_progress = now;
    if (store) {
      x.store_buf.push_back({e.out.mem_addr, e.out.result});
      MemoryScan scan =
          mdrt.scan_early_reads(ring, c, e.out.mem_addr, e.out.result, cfg.strict_lbit_squash);
      if (scan.squash) squash_from(*scan.squash, SquashReason::memory_early_read);
    }
    write_register(c, e);
    if (e.dest >= 0 && x.rename[e.dest] == e.seq) x.rename[e.dest] = no_producer;
    const bool redirect = e.out.next_pc != e.predicted_next;
    if (is_branch(e.inst.op)) {
      bp.update(e.pc, e.out.taken, branch_target(e.inst, e.pc));
      ++stats.branches;
      if (redirect) ++stats.mispredicts;
    }
    if (loop_branch) {
      ring.set_joined(c);
      return;
    }
    if (redirect) {
      flush_younger(c, e.seq);
      x.fetch_pc = e.out.next_pc;
      return;
    }
  }
}

void Core::Impl::flush_younger(int c, uint64_t committed_seq) {
  Context& x = ctx[c];
  for (const auto& e : x.rob)
    if (e.stage == Stage::in_rs) --rs_used[static_cast<int>(e.timing.cls)];
  x.rob.clear();
  x.fetch_buf.clear();
  x.rename.fill(no_producer);
  std::erase_if(x.load_log, [&](const LoadRecord& r) { return r.seq > committed_seq; });
  x.fetch_stopped = false;
}

void Core::Impl::kill(int c) {
  Context& x = ctx[c];
  for (const auto& e : x.rob)
    if (e.stage == Stage::in_rs) --rs_used[static_cast<int>(e.timing.cls)];
  x.rob.clear();
  x.fetch_buf.clear();
  x.rename.fill(no_producer);
  x.store_buf.clear();
  x.load_log.clear();
  x.local_commits = 0;
  x.halted = false;
  x.fetch_stopped = false;
  mdrt.clear_context(c);
}

void Core::Impl::init_clone(int c, int64_t iteration) {
  const RegisterFile& hf = files[head()];
  RegisterFile& f = files[c];
  for (int r = 0; r < num_regs; ++r) f[r] = RegisterCell{.value = hf[r].value};
  for (const auto& entry : lsst.entries()) {
    if (auto p = lsst.predict(entry.reg, iteration)) {
      RegisterCell& cell = f[entry.reg];
      cell.value = *p;
      cell.lsst_seed = true;
    }
  }
  Context& x = ctx[c];
  x.fetch_pc = continuation;
  x.fetch_ready = now + cfg.clone_cost;
  x.fetch_stopped = false;
  x.promoted_cycle = ~0ull;
}

void Core::Impl::squash_from(int c, SquashReason reason) {
  ++stats.squashes[static_cast<int>(reason)];
  for (const auto& s : ring.squash_from(c)) {
    stats.squashed_instructions += ctx[s.slot].rob.size() + ctx[s.slot].local_commits;
    kill(s.slot);
    init_clone(s.slot, s.iteration);
    ++stats.clones;
  }
}

void Core::Impl::reset_bits(int c) {
  for (auto& cell : files[c]) cell.r = cell.d = cell.l = cell.lsst_seed = false;
}

void Core::Impl::enter_pre_dsmt(uint32_t branch) {
  const LoopTableEntry* e = loops.entry(branch);
  loops.stack().offer(branch, e->target_addr);
  mode = Mode::pre_dsmt;
  continuation = e->target_addr;
  active_branch = branch;
  lsst.clear();
  d_anchor.reset();
  r_anchor.reset();
  reset_bits(head());
  pre_iterations = 0;
  pre_start_cycle = now;
  pre_start_committed = stats.committed;
}

void Core::Impl::begin_full_dsmt(int h, uint64_t committed_seq) {
  LoopTableEntry* e = loops.entry(active_branch);
  const uint64_t committed = stats.committed - pre_start_committed;
  const uint64_t cycles = now - pre_start_cycle + 1;
  if (!e->sipc_history) e->pre_dsmt_ipc = static_cast<double>(committed) / static_cast<double>(cycles);
  e->run_length = static_cast<double>(committed) / pre_iterations;
  ++e->episodes;
  lsst.snapshot_bases([&](int r) { return files[h][r].value; });
  ring.reset(h, 0);
  flush_younger(h, committed_seq);
  ctx[h].fetch_pc = continuation;
  mode = Mode::full_dsmt;
  ++stats.dsmt_episodes;
  measuring = !e->sipc_history.has_value();
  ep_start_cycle = now;
  ep_start_committed = stats.committed_in_dsmt;
  ep_iterations = 0;
}

void Core::Impl::complete_head(int h) {
  for (int r = 0; r < num_regs; ++r) {
    d_anchor[r] = files[h][r].d;
    r_anchor[r] = files[h][r].r;
  }
  ++ep_iterations;
  if (auto* e = loops.entry(active_branch)) ++e->dsmt_iterations;
  auto succ = ring.successor(h);
  if (!succ) {
    ring.advance_head_iteration();
    reset_bits(h);
    ctx[h].fetch_pc = continuation;
    ctx[h].fetch_stopped = false;
    return;
  }
  const int s = *succ;
  RegisterFile& sf = files[s];
  const RegisterFile& hf = files[h];
  bool seed_bad = false, reg_bad = false, mem_bad = false;
  for (int r = 1; r < num_regs; ++r) {
    if (!sf[r].l) continue;
    bool ok = sf[r].read_value == hf[r].value;
    if (sf[r].lsst_seed) {
      lsst.record_outcome(r, ok);
      seed_bad = seed_bad || !ok;
    } else {
      reg_bad = reg_bad || !ok;
    }
  }
  for (const auto& rec : ctx[s].load_log) {
    auto it = memory.find(rec.addr);
    if ((it == memory.end() ? 0u : it->second) != rec.value) mem_bad = true;
  }
  if (seed_bad || reg_bad || mem_bad)
    squash_from(s, seed_bad  ? SquashReason::lsst_mispredict
                   : reg_bad ? SquashReason::register_early_read
                             : SquashReason::memory_early_read);

  ring.retire_head();
  kill(h);
  transfer_registers(hf, sf);
  for (auto& cell : sf) cell.l = cell.lsst_seed = false;
  Context& sx = ctx[s];
  credit(sx.local_commits);
  sx.local_commits = 0;
  sx.load_log.clear();
  sx.promoted_cycle = now;
  ++stats.promotions;
}

void Core::Impl::finish_measurement() {
  measuring = false;
  LoopTableEntry* e = loops.entry(active_branch);
  const uint64_t cycles = now + 1 - ep_start_cycle;
  const uint64_t committed = stats.committed_in_dsmt - ep_start_committed;
  double sipc = compute_sipc(committed, cycles, e->run_length, ep_iterations, cfg.context_count,
                             cfg.min_run_length);
  e->sipc_history = sipc;
  e->quality = classify(sipc, e->pre_dsmt_ipc.value_or(0.0));
  loops.stack().record_sipc(active_branch, sipc);
  loops.nest_select();
}

void Core::Impl::exit_dsmt() {
  if (measuring) finish_measurement();
  for (int s : ring.squash_speculative()) {
    stats.squashed_instructions += ctx[s].rob.size() + ctx[s].local_commits;
    kill(s);
  }
  mdrt.clear();
  mode = Mode::non_dsmt;
  int h = head();
  reset_bits(h);
  d_anchor.reset();
  r_anchor.reset();
  ctx[h].fetch_stopped = false;
  stats.lsst_entries = lsst.entries();
}

Core::Core(const SimConfig& cfg, const Program& prog, const ArchState& start)
    : impl_(std::make_unique<Impl>(cfg, prog, start)) {}

Core::~Core() = default;

bool Core::step() {
  Impl& m = *impl_;
  if (m.end) return false;
  if (!m.debug) {
    m.cycle();
  } else {
    std::vector<uint64_t> before;
    for (const auto& x : m.ctx) before.push_back(x.local_commits);
    uint64_t committed = m.stats.committed;
    uint64_t grants = m.stats.fetch_port_grants;
    uint64_t cyc = m.now;
    m.cycle();
    *m.debug << "cycle " << cyc << " mode " << to_string(m.mode) << " fetch_ports "
             << (m.stats.fetch_port_grants - grants) << " retired " << (m.stats.committed - committed)
             << " local";
    for (size_t c = 0; c < m.ctx.size(); ++c)
      *m.debug << ' ' << static_cast<int64_t>(m.ctx[c].local_commits) - static_cast<int64_t>(before[c]);
    *m.debug << '\n';
  }
  return !m.end;
}

EndReason Core::run() {
  while (step()) {
  }
  return *impl_->end;
}

std::optional<EndReason> Core::end_reason() const { return impl_->end; }
uint64_t Core::cycle() const { return impl_->now; }
Mode Core::mode() const { return impl_->mode; }
std::optional<uint32_t> Core::active_loop() const {
  if (impl_->mode == Mode::non_dsmt) return std::nullopt;
  return impl_->active_branch;
}
const StoreTrace& Core::store_trace() const { return impl_->trace; }
const CoreStats& Core::stats() const { return impl_->stats; }
const LoopDetector& Core::loops() const { return impl_->loops; }
const ThreadRing& Core::ring() const { return impl_->ring; }
void Core::set_trace(std::ostream* out) { impl_->debug = out; }

ArchState Core::arch_state() const {
  const Impl& m = *impl_;
  ArchState s;
  int h = m.ring.head();
  const Context& x = m.ctx[h];
  s.pc = x.halted || x.rob.empty() ? x.fetch_pc : x.rob.front().pc;
  for (int r = 1; r < num_regs; ++r) s.set_reg(r, m.files[h][r].value);
  s.memory = m.memory;
  for (const auto& st : x.store_buf) s.memory[st.addr] = st.value;
  s.halted = x.halted;
  s.committed_count = m.stats.committed;
  return s;
}

void Core::check_invariants() const {
  const Impl& m = *impl_;
  m.ring.check();
  const auto& p = m.cfg.pipeline;
  for (size_t c = 0; c < m.ctx.size(); ++c) {
    const Context& x = m.ctx[c];
    if (static_cast<int>(x.rob.size()) > p.rob_size) throw ProtocolError("ROB over capacity");
    if (x.iq_count() > p.iq_size) throw ProtocolError("IQ over capacity");
    if (x.lsq_count() > p.lsq_size) throw ProtocolError("LSQ over capacity");
    if (!m.ring.flags(static_cast<int>(c)).valid && !x.rob.empty())
      throw ProtocolError("invalid context holds instructions");
    if (!m.ring.flags(static_cast<int>(c)).speculative && x.local_commits)
      throw ProtocolError("non-speculative context holds uncredited commits");
    for (size_t i = 1; i < x.rob.size(); ++i)
      if (x.rob[i].seq != x.rob[i - 1].seq + 1) throw ProtocolError("ROB out of program order");
  }
  for (int k = 0; k < num_fu_classes; ++k)
    if (m.rs_used[k] < 0 || m.rs_used[k] > p.rs_counts[k])
      throw ProtocolError("reservation stations over capacity");
  if (m.mdrt.occupancy() > m.mdrt.capacity()) throw ProtocolError("MDRT over capacity");
  if (m.mode != Mode::full_dsmt && m.ring.size() != 1)
    throw ProtocolError("speculative contexts outside full-DSMT mode");
}

}  // namespace dsmt
