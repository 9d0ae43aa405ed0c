#include "dsmt/oracle.hpp"

#include <cstdio>
#include <ostream>
#include <set>

namespace dsmt {

OracleError::OracleError(Kind kind, const std::string& msg, ArchState partial)
    : std::runtime_error(msg), kind_(kind), partial_(std::move(partial)) {}

ArchState initial_state(const Program& prog) {
  ArchState s;
  s.pc = prog.base_address;
  for (const auto& seg : prog.data)
    for (size_t i = 0; i < seg.words.size(); ++i)
      s.memory[seg.base + static_cast<uint32_t>(i) * 4u] = seg.words[i];
  return s;
}

namespace {

std::string hex(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

std::string reg_name(int unified) {
  return unified < fp_base ? "r" + std::to_string(unified) : "f" + std::to_string(unified - fp_base);
}

}  // namespace

void Oracle::step(ArchState& s, StoreTrace* stores) const {
  if (s.halted) return;
  if (!prog_->contains(s.pc))
    throw OracleError(OracleError::Kind::runaway, "pc " + hex(s.pc) + " outside program image", s);
  Instruction inst;
  try {
    inst = decode(prog_->word_at(s.pc));
  } catch (const DecodeError& e) {
    throw OracleError(OracleError::Kind::trap, e.what(), s);
  }
  auto src = source_regs(inst);
  uint32_t a = src.count > 0 ? s.reg(src.regs[0]) : 0;
  uint32_t b = src.count > 1 ? s.reg(src.regs[1]) : 0;
  ExecOutcome out = evaluate(inst, s.pc, a, b);
  if (out.trap != Trap::none)
    throw OracleError(OracleError::Kind::trap,
                      std::string(out.trap == Trap::divide_by_zero ? "division by zero"
                                                                   : "misaligned access") +
                          " at " + hex(s.pc),
                      s);
  int dst = dest_reg(inst);
  uint32_t value = out.result;
  if (is_load(inst.op)) value = s.load(out.mem_addr);
  if (is_store(inst.op)) {
    s.memory[out.mem_addr] = out.result;
    if (stores) stores->push_back({out.mem_addr, out.result});
  }
  if (dst >= 0) s.set_reg(dst, value);
  if (trace_) {
    *trace_ << hex(s.pc) << ' ' << disassemble(inst);
    if (dst >= 0) *trace_ << " -> " << reg_name(dst) << '=' << hex(value);
    else if (is_store(inst.op)) *trace_ << " -> mem[" << hex(out.mem_addr) << "]=" << hex(out.result);
    *trace_ << '\n';
  }
  ++s.committed_count;
  if (inst.op == Opcode::halt) s.halted = true;
  else s.pc = out.next_pc;
}

uint64_t Oracle::advance(ArchState& state, uint64_t count, StoreTrace* stores) const {
  uint64_t n = 0;
  while (n < count && !state.halted) {
    step(state, stores);
    ++n;
  }
  return n;
}

ArchState step(const ArchState& state, const Program& prog) {
  ArchState next = state;
  Oracle(prog).step(next);
  return next;
}

RunResult run(const Program& prog, uint64_t fuel, std::ostream* trace) {
  RunResult r{initial_state(prog), {}};
  Oracle o(prog, trace);
  o.advance(r.state, fuel, &r.stores);
  if (!r.state.halted)
    throw OracleError(OracleError::Kind::timeout,
                      "fuel of " + std::to_string(fuel) + " instructions exhausted before halt",
                      r.state);
  return r;
}

std::vector<Mismatch> diff(const ArchState& expected, const ArchState& actual) {
  std::vector<Mismatch> out;
  if (expected.pc != actual.pc) out.push_back({"pc", expected.pc, actual.pc});
  for (int r = 0; r < num_regs; ++r)
    if (expected.reg(r) != actual.reg(r)) out.push_back({reg_name(r), expected.reg(r), actual.reg(r)});
  std::set<uint32_t> keys;
  for (const auto& [k, v] : expected.memory) keys.insert(k);
  for (const auto& [k, v] : actual.memory) keys.insert(k);
  for (uint32_t k : keys) {
    uint32_t e = expected.load(k), a = actual.load(k);
    if (e != a) out.push_back({"mem[" + hex(k) + "]", e, a});
  }
  return out;
}

std::string format_mismatch(const Mismatch& m) {
  return m.location + ": expected " + hex(m.expected) + ", actual " + hex(m.actual);
}

}  // namespace dsmt
