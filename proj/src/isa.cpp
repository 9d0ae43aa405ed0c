#include "dsmt/isa.hpp"

#include <bit>
#include <climits>
#include <cmath>
#include <cstdio>

namespace dsmt {

namespace {

enum class Format : uint8_t { r_int, r_fp, i_dest, i_src, i_branch, jump, bare };

struct OpInfo {
  Opcode op;
  std::string_view mnemonic;
  Format format;
  uint8_t major;  // bits 31..26
  uint8_t funct;  // bits 5..0 for R formats
  FuClass fu;
};

// Encoding table. R formats use major 0x00 (integer) and 0x11 (fp) with a
// function code; everything else is selected by the major opcode alone.
constexpr std::array<OpInfo, num_opcodes> op_table{{
    {Opcode::nop, "nop", Format::bare, 0x00, 0x00, FuClass::int_alu},
    {Opcode::add, "add", Format::r_int, 0x00, 0x20, FuClass::int_alu},
    {Opcode::sub, "sub", Format::r_int, 0x00, 0x22, FuClass::int_alu},
    {Opcode::and_, "and", Format::r_int, 0x00, 0x24, FuClass::int_alu},
    {Opcode::or_, "or", Format::r_int, 0x00, 0x25, FuClass::int_alu},
    {Opcode::xor_, "xor", Format::r_int, 0x00, 0x26, FuClass::int_alu},
    {Opcode::slt, "slt", Format::r_int, 0x00, 0x2A, FuClass::int_alu},
    {Opcode::sll, "sll", Format::r_int, 0x00, 0x01, FuClass::int_alu},
    {Opcode::srl, "srl", Format::r_int, 0x00, 0x02, FuClass::int_alu},
    {Opcode::sra, "sra", Format::r_int, 0x00, 0x03, FuClass::int_alu},
    {Opcode::mul, "mul", Format::r_int, 0x00, 0x18, FuClass::int_mul},
    {Opcode::div, "div", Format::r_int, 0x00, 0x1A, FuClass::int_div},
    {Opcode::rem, "rem", Format::r_int, 0x00, 0x1B, FuClass::int_div},
    {Opcode::addi, "addi", Format::i_dest, 0x08, 0, FuClass::int_alu},
    {Opcode::slti, "slti", Format::i_dest, 0x0A, 0, FuClass::int_alu},
    {Opcode::andi, "andi", Format::i_dest, 0x0C, 0, FuClass::int_alu},
    {Opcode::ori, "ori", Format::i_dest, 0x0D, 0, FuClass::int_alu},
    {Opcode::lui, "lui", Format::i_dest, 0x0F, 0, FuClass::int_alu},
    {Opcode::lw, "lw", Format::i_dest, 0x23, 0, FuClass::load_store},
    {Opcode::sw, "sw", Format::i_src, 0x2B, 0, FuClass::load_store},
    {Opcode::flw, "flw", Format::i_dest, 0x31, 0, FuClass::load_store},
    {Opcode::fsw, "fsw", Format::i_src, 0x39, 0, FuClass::load_store},
    {Opcode::fadd, "fadd", Format::r_fp, 0x11, 0x00, FuClass::fp_add},
    {Opcode::fsub, "fsub", Format::r_fp, 0x11, 0x01, FuClass::fp_add},
    {Opcode::fmul, "fmul", Format::r_fp, 0x11, 0x02, FuClass::fp_mul},
    {Opcode::fdiv, "fdiv", Format::r_fp, 0x11, 0x03, FuClass::fp_div},
    {Opcode::fmov, "fmov", Format::r_fp, 0x11, 0x06, FuClass::fp_add},
    {Opcode::itof, "itof", Format::r_fp, 0x11, 0x20, FuClass::fp_add},
    {Opcode::ftoi, "ftoi", Format::r_fp, 0x11, 0x24, FuClass::fp_add},
    {Opcode::flt, "flt", Format::r_fp, 0x11, 0x3C, FuClass::fp_add},
    {Opcode::beq, "beq", Format::i_branch, 0x04, 0, FuClass::int_alu},
    {Opcode::bne, "bne", Format::i_branch, 0x05, 0, FuClass::int_alu},
    {Opcode::blt, "blt", Format::i_branch, 0x06, 0, FuClass::int_alu},
    {Opcode::j, "j", Format::jump, 0x02, 0, FuClass::int_alu},
    {Opcode::halt, "halt", Format::bare, 0x3E, 0, FuClass::int_alu},
}};

const OpInfo& info(Opcode op) { return op_table[static_cast<size_t>(op)]; }

bool zero_extended_imm(Opcode op) {
  return op == Opcode::andi || op == Opcode::ori || op == Opcode::lui;
}

bool is_shift(Opcode op) { return op == Opcode::sll || op == Opcode::srl || op == Opcode::sra; }

int32_t sext16(uint32_t v) { return static_cast<int16_t>(static_cast<uint16_t>(v)); }

int32_t sext26(uint32_t v) {
  v &= 0x03FFFFFFu;
  return (v & 0x02000000u) ? static_cast<int32_t>(v | 0xFC000000u) : static_cast<int32_t>(v);
}

}  // namespace

std::string_view to_string(Opcode op) { return info(op).mnemonic; }

std::string_view to_string(FuClass c) {
  switch (c) {
    case FuClass::int_alu: return "IntALU";
    case FuClass::int_mul: return "IntMul";
    case FuClass::int_div: return "IntDiv";
    case FuClass::fp_add: return "FPAdd";
    case FuClass::fp_mul: return "FPMul";
    case FuClass::fp_div: return "FPDiv";
    case FuClass::load_store: return "LoadStore";
  }
  return "?";
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view m) {
  for (const auto& e : op_table)
    if (e.mnemonic == m) return e.op;
  return std::nullopt;
}

DecodeError::DecodeError(uint32_t word)
    : std::runtime_error([word] {
        char buf[64];
        std::snprintf(buf, sizeof buf, "undefined instruction word 0x%08X", word);
        return std::string(buf);
      }()),
      word_(word) {}

uint32_t encode(const Instruction& inst) {
  const OpInfo& e = info(inst.op);
  const uint32_t major = uint32_t{e.major} << 26;
  const uint32_t imm16 = static_cast<uint32_t>(inst.imm) & 0xFFFFu;
  switch (e.format) {
    case Format::bare:
      return major;
    case Format::r_int:
    case Format::r_fp: {
      uint32_t shamt = is_shift(inst.op) ? (static_cast<uint32_t>(inst.imm) & 31u) : 0u;
      return major | (uint32_t{inst.rs} << 21) | (uint32_t{inst.rt} << 16) |
             (uint32_t{inst.rd} << 11) | (shamt << 6) | e.funct;
    }
    case Format::i_dest:
      return major | (uint32_t{inst.rs} << 21) | (uint32_t{inst.rd} << 16) | imm16;
    case Format::i_src:
    case Format::i_branch:
      return major | (uint32_t{inst.rs} << 21) | (uint32_t{inst.rt} << 16) | imm16;
    case Format::jump:
      return major | (static_cast<uint32_t>(inst.imm) & 0x03FFFFFFu);
  }
  return major;
}

Instruction decode(uint32_t word) {
  const uint32_t major = word >> 26;
  const uint8_t rs = (word >> 21) & 31u;
  const uint8_t rt = (word >> 16) & 31u;
  const uint8_t rd = (word >> 11) & 31u;
  const uint32_t funct = word & 63u;

  if (major == 0x00 || major == 0x11) {
    if (major == 0x00 && funct == 0x00) return Instruction{};
    for (const auto& e : op_table) {
      if ((e.format != Format::r_int && e.format != Format::r_fp) || e.major != major ||
          e.funct != funct)
        continue;
      Instruction inst{e.op, rd, rs, rt, 0};
      if (is_shift(e.op)) {
        inst.rt = 0;
        inst.imm = static_cast<int32_t>((word >> 6) & 31u);
      }
      // unary forms carry a single source
      if (e.op == Opcode::fmov || e.op == Opcode::itof || e.op == Opcode::ftoi) inst.rt = 0;
      return inst;
    }
    throw DecodeError(word);
  }
  for (const auto& e : op_table) {
    if (e.major != major || e.format == Format::r_int || e.format == Format::r_fp) continue;
    switch (e.format) {
      case Format::bare:
        return Instruction{e.op, 0, 0, 0, 0};
      case Format::i_dest: {
        int32_t imm = zero_extended_imm(e.op) ? static_cast<int32_t>(word & 0xFFFFu) : sext16(word);
        return Instruction{e.op, rt, e.op == Opcode::lui ? uint8_t{0} : rs, 0, imm};
      }
      case Format::i_src:
      case Format::i_branch:
        return Instruction{e.op, 0, rs, rt, sext16(word)};
      case Format::jump:
        return Instruction{e.op, 0, 0, 0, sext26(word)};
      default:
        break;
    }
  }
  throw DecodeError(word);
}

int Latencies::of(FuClass c) const {
  switch (c) {
    case FuClass::int_alu: return int_alu;
    case FuClass::int_mul: return int_mul;
    case FuClass::int_div: return int_div;
    case FuClass::fp_add: return fp_add;
    case FuClass::fp_mul: return fp_mul;
    case FuClass::fp_div: return fp_div;
    case FuClass::load_store: return address_gen;
  }
  return 1;
}

FuClass fu_class(Opcode op) { return info(op).fu; }

FuTiming classify_fu(const Instruction& inst, const Latencies& lat) {
  FuClass c = fu_class(inst.op);
  return {c, lat.of(c)};
}

bool is_branch(Opcode op) {
  return op == Opcode::beq || op == Opcode::bne || op == Opcode::blt || op == Opcode::j;
}
bool is_conditional(Opcode op) { return op == Opcode::beq || op == Opcode::bne || op == Opcode::blt; }
bool is_load(Opcode op) { return op == Opcode::lw || op == Opcode::flw; }
bool is_store(Opcode op) { return op == Opcode::sw || op == Opcode::fsw; }

int dest_reg(const Instruction& inst) {
  switch (inst.op) {
    case Opcode::add: case Opcode::sub: case Opcode::and_: case Opcode::or_: case Opcode::xor_:
    case Opcode::slt: case Opcode::sll: case Opcode::srl: case Opcode::sra: case Opcode::mul:
    case Opcode::div: case Opcode::rem: case Opcode::addi: case Opcode::slti: case Opcode::andi:
    case Opcode::ori: case Opcode::lui: case Opcode::lw: case Opcode::ftoi: case Opcode::flt:
      return inst.rd == 0 ? -1 : inst.rd;
    case Opcode::flw: case Opcode::fadd: case Opcode::fsub: case Opcode::fmul: case Opcode::fdiv:
    case Opcode::fmov: case Opcode::itof:
      return fp_base + inst.rd;
    default:
      return -1;
  }
}

SourceRegs source_regs(const Instruction& inst) {
  SourceRegs s;
  auto push = [&s](int r) { s.regs[s.count++] = r; };
  switch (inst.op) {
    case Opcode::add: case Opcode::sub: case Opcode::and_: case Opcode::or_: case Opcode::xor_:
    case Opcode::slt: case Opcode::mul: case Opcode::div: case Opcode::rem:
    case Opcode::beq: case Opcode::bne: case Opcode::blt: case Opcode::sw:
      push(inst.rs);
      push(inst.rt);
      break;
    case Opcode::sll: case Opcode::srl: case Opcode::sra: case Opcode::addi: case Opcode::slti:
    case Opcode::andi: case Opcode::ori: case Opcode::lw: case Opcode::flw: case Opcode::itof:
      push(inst.rs);
      break;
    case Opcode::fsw:
      push(inst.rs);
      push(fp_base + inst.rt);
      break;
    case Opcode::fadd: case Opcode::fsub: case Opcode::fmul: case Opcode::fdiv: case Opcode::flt:
      push(fp_base + inst.rs);
      push(fp_base + inst.rt);
      break;
    case Opcode::fmov: case Opcode::ftoi:
      push(fp_base + inst.rs);
      break;
    default:
      break;
  }
  return s;
}

float as_float(uint32_t bits) { return std::bit_cast<float>(bits); }
uint32_t float_bits(float f) { return std::bit_cast<uint32_t>(f); }

uint32_t branch_target(const Instruction& inst, uint32_t pc) {
  return pc + 4u + static_cast<uint32_t>(inst.imm) * 4u;
}

ExecOutcome evaluate(const Instruction& inst, uint32_t pc, uint32_t a, uint32_t b) {
  ExecOutcome out;
  out.next_pc = pc + 4u;
  const auto sa = static_cast<int32_t>(a);
  const auto sb = static_cast<int32_t>(b);
  const auto uimm = static_cast<uint32_t>(inst.imm);
  switch (inst.op) {
    case Opcode::nop: break;
    case Opcode::add: out.result = a + b; break;
    case Opcode::sub: out.result = a - b; break;
    case Opcode::and_: out.result = a & b; break;
    case Opcode::or_: out.result = a | b; break;
    case Opcode::xor_: out.result = a ^ b; break;
    case Opcode::slt: out.result = sa < sb ? 1u : 0u; break;
    case Opcode::sll: out.result = a << (uimm & 31u); break;
    case Opcode::srl: out.result = a >> (uimm & 31u); break;
    case Opcode::sra: out.result = static_cast<uint32_t>(sa >> (uimm & 31u)); break;
    case Opcode::mul: out.result = a * b; break;
    case Opcode::div:
      if (b == 0) out.trap = Trap::divide_by_zero;
      else if (sa == INT32_MIN && sb == -1) out.result = a;
      else out.result = static_cast<uint32_t>(sa / sb);
      break;
    case Opcode::rem:
      if (b == 0) out.trap = Trap::divide_by_zero;
      else if (sa == INT32_MIN && sb == -1) out.result = 0;
      else out.result = static_cast<uint32_t>(sa % sb);
      break;
    case Opcode::addi: out.result = a + uimm; break;
    case Opcode::slti: out.result = sa < inst.imm ? 1u : 0u; break;
    case Opcode::andi: out.result = a & uimm; break;
    case Opcode::ori: out.result = a | uimm; break;
    case Opcode::lui: out.result = uimm << 16; break;
    case Opcode::lw:
    case Opcode::flw:
      out.mem_addr = a + uimm;
      if (out.mem_addr & 3u) out.trap = Trap::misaligned;
      break;
    case Opcode::sw:
    case Opcode::fsw:
      out.mem_addr = a + uimm;
      out.result = b;
      if (out.mem_addr & 3u) out.trap = Trap::misaligned;
      break;
    case Opcode::fadd: out.result = float_bits(as_float(a) + as_float(b)); break;
    case Opcode::fsub: out.result = float_bits(as_float(a) - as_float(b)); break;
    case Opcode::fmul: out.result = float_bits(as_float(a) * as_float(b)); break;
    case Opcode::fdiv: out.result = float_bits(as_float(a) / as_float(b)); break;
    case Opcode::fmov: out.result = a; break;
    case Opcode::itof: out.result = float_bits(static_cast<float>(sa)); break;
    case Opcode::ftoi: {
      float f = as_float(a);
      if (std::isnan(f)) out.result = 0;
      else if (f >= 2147483648.0f) out.result = static_cast<uint32_t>(INT32_MAX);
      else if (f < -2147483648.0f) out.result = static_cast<uint32_t>(INT32_MIN);
      else out.result = static_cast<uint32_t>(static_cast<int32_t>(f));
      break;
    }
    case Opcode::flt: out.result = as_float(a) < as_float(b) ? 1u : 0u; break;
    case Opcode::beq: out.taken = a == b; break;
    case Opcode::bne: out.taken = a != b; break;
    case Opcode::blt: out.taken = sa < sb; break;
    case Opcode::j: out.taken = true; break;
    case Opcode::halt: out.next_pc = pc; break;
  }
  if (out.taken) out.next_pc = branch_target(inst, pc);
  return out;
}

std::string disassemble(const Instruction& inst) {
  char buf[64];
  const auto m = to_string(inst.op);
  const int n = static_cast<int>(m.size());
  const char* mn = m.data();
  switch (inst.op) {
    case Opcode::nop: case Opcode::halt:
      std::snprintf(buf, sizeof buf, "%.*s", n, mn);
      break;
    case Opcode::sll: case Opcode::srl: case Opcode::sra:
      std::snprintf(buf, sizeof buf, "%.*s r%d, r%d, %d", n, mn, inst.rd, inst.rs, inst.imm);
      break;
    case Opcode::addi: case Opcode::slti: case Opcode::andi: case Opcode::ori:
      std::snprintf(buf, sizeof buf, "%.*s r%d, r%d, %d", n, mn, inst.rd, inst.rs, inst.imm);
      break;
    case Opcode::lui:
      std::snprintf(buf, sizeof buf, "lui r%d, %d", inst.rd, inst.imm);
      break;
    case Opcode::lw:
      std::snprintf(buf, sizeof buf, "lw r%d, %d(r%d)", inst.rd, inst.imm, inst.rs);
      break;
    case Opcode::flw:
      std::snprintf(buf, sizeof buf, "flw f%d, %d(r%d)", inst.rd, inst.imm, inst.rs);
      break;
    case Opcode::sw:
      std::snprintf(buf, sizeof buf, "sw r%d, %d(r%d)", inst.rt, inst.imm, inst.rs);
      break;
    case Opcode::fsw:
      std::snprintf(buf, sizeof buf, "fsw f%d, %d(r%d)", inst.rt, inst.imm, inst.rs);
      break;
    case Opcode::fadd: case Opcode::fsub: case Opcode::fmul: case Opcode::fdiv:
      std::snprintf(buf, sizeof buf, "%.*s f%d, f%d, f%d", n, mn, inst.rd, inst.rs, inst.rt);
      break;
    case Opcode::fmov:
      std::snprintf(buf, sizeof buf, "fmov f%d, f%d", inst.rd, inst.rs);
      break;
    case Opcode::itof:
      std::snprintf(buf, sizeof buf, "itof f%d, r%d", inst.rd, inst.rs);
      break;
    case Opcode::ftoi:
      std::snprintf(buf, sizeof buf, "ftoi r%d, f%d", inst.rd, inst.rs);
      break;
    case Opcode::flt:
      std::snprintf(buf, sizeof buf, "flt r%d, f%d, f%d", inst.rd, inst.rs, inst.rt);
      break;
    case Opcode::beq: case Opcode::bne: case Opcode::blt:
      std::snprintf(buf, sizeof buf, "%.*s r%d, r%d, %+d", n, mn, inst.rs, inst.rt, inst.imm);
      break;
    case Opcode::j:
      std::snprintf(buf, sizeof buf, "j %+d", inst.imm);
      break;
    default:
      std::snprintf(buf, sizeof buf, "%.*s r%d, r%d, r%d", n, mn, inst.rd, inst.rs, inst.rt);
      break;
  }
  return buf;
}

}  // namespace dsmt
