#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsmt {

// 64 architectural registers: 0..31 integer, 32..63 floating point.
inline constexpr int num_int_regs = 32;
inline constexpr int num_fp_regs = 32;
inline constexpr int num_regs = num_int_regs + num_fp_regs;
inline constexpr int fp_base = num_int_regs;

enum class Opcode : uint8_t {
  nop,
  add, sub, and_, or_, xor_, slt, sll, srl, sra,
  mul, div, rem,
  addi, slti, andi, ori, lui,
  lw, sw, flw, fsw,
  fadd, fsub, fmul, fdiv, fmov, itof, ftoi, flt,
  beq, bne, blt, j,
  halt,
};

inline constexpr int num_opcodes = static_cast<int>(Opcode::halt) + 1;

enum class FuClass : uint8_t { int_alu, int_mul, int_div, fp_add, fp_mul, fp_div, load_store };

inline constexpr int num_fu_classes = 7;

std::string_view to_string(Opcode op);
std::string_view to_string(FuClass c);
std::optional<Opcode> opcode_from_mnemonic(std::string_view m);

/// Decoded instruction with logical operand roles: `rd` is always the
/// destination, `rs`/`rt` the first/second source. Register fields are 0..31
/// within their file; whether a field names an fp register depends on the
/// opcode (see `dest_reg` / `source_regs`). Unused fields are zero.
struct Instruction {
  Opcode op = Opcode::nop;
  uint8_t rd = 0;
  uint8_t rs = 0;
  uint8_t rt = 0;
  int32_t imm = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(uint32_t word);
  uint32_t word() const { return word_; }

 private:
  uint32_t word_;
};

uint32_t encode(const Instruction& inst);
Instruction decode(uint32_t word);

struct Latencies {
  int int_alu = 1;
  int int_mul = 3;
  int int_div = 12;
  int fp_add = 2;
  int fp_mul = 4;
  int fp_div = 12;
  int address_gen = 1;

  int of(FuClass c) const;
};

FuClass fu_class(Opcode op);

struct FuTiming {
  FuClass cls;
  int latency;  // loads/stores: address generation only, cache latency is added on top
};

FuTiming classify_fu(const Instruction& inst, const Latencies& lat = {});

bool is_branch(Opcode op);       // beq/bne/blt/j
bool is_conditional(Opcode op);  // beq/bne/blt
bool is_load(Opcode op);
bool is_store(Opcode op);

/// Unified destination register index, or -1. Writes to integer r0 map to -1.
int dest_reg(const Instruction& inst);

struct SourceRegs {
  std::array<int, 2> regs{-1, -1};
  int count = 0;
};

/// Unified source register indices in operand order (first, second).
SourceRegs source_regs(const Instruction& inst);

enum class Trap : uint8_t { none, divide_by_zero, misaligned };

struct ExecOutcome {
  uint32_t result = 0;   // register result, or store data for stores
  uint32_t next_pc = 0;
  uint32_t mem_addr = 0;
  Trap trap = Trap::none;
  bool taken = false;
};

/// Architectural effect of one instruction given its source operand values.
/// Loads produce the address only; the caller supplies the loaded word.
ExecOutcome evaluate(const Instruction& inst, uint32_t pc, uint32_t src0, uint32_t src1);

/// Branch target for direct control transfers (taken path).
uint32_t branch_target(const Instruction& inst, uint32_t pc);

std::string disassemble(const Instruction& inst);

float as_float(uint32_t bits);
uint32_t float_bits(float f);

}  // namespace dsmt
