#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsmt/assembler.hpp"

namespace dsmt {

using Memory = std::map<uint32_t, uint32_t>;

/// Architectural state. Memory holds only word-aligned keys; absent words
/// read as zero.
struct ArchState {
  uint32_t pc = 0;
  std::array<uint32_t, num_int_regs> int_regs{};
  std::array<uint32_t, num_fp_regs> fp_regs{};
  Memory memory;
  bool halted = false;
  uint64_t committed_count = 0;

  uint32_t reg(int unified) const {
    return unified < fp_base ? int_regs[unified] : fp_regs[unified - fp_base];
  }
  void set_reg(int unified, uint32_t v) {
    if (unified == 0) return;
    if (unified < fp_base) int_regs[unified] = v;
    else fp_regs[unified - fp_base] = v;
  }
  uint32_t load(uint32_t addr) const {
    auto it = memory.find(addr);
    return it == memory.end() ? 0u : it->second;
  }
};

struct StoreRecord {
  uint32_t addr;
  uint32_t value;
  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

using StoreTrace = std::vector<StoreRecord>;

class OracleError : public std::runtime_error {
 public:
  enum class Kind { runaway, trap, timeout };
  OracleError(Kind kind, const std::string& msg, ArchState partial);
  Kind kind() const { return kind_; }
  const ArchState& partial() const { return partial_; }

 private:
  Kind kind_;
  ArchState partial_;
};

/// Fresh state for a program: pc at the image base, data directives loaded.
ArchState initial_state(const Program& prog);

/// Applies one instruction. Throws OracleError (runaway/trap).
ArchState step(const ArchState& state, const Program& prog);

struct RunResult {
  ArchState state;
  StoreTrace stores;
};

class Oracle {
 public:
  explicit Oracle(const Program& prog, std::ostream* trace = nullptr)
      : prog_(&prog), trace_(trace) {}

  /// In-place single step; appends the committed store to `stores` if given.
  void step(ArchState& state, StoreTrace* stores = nullptr) const;

  /// Executes up to `count` instructions, stopping early at halt. Returns
  /// the number executed.
  uint64_t advance(ArchState& state, uint64_t count, StoreTrace* stores = nullptr) const;

 private:
  const Program* prog_;
  std::ostream* trace_;
};

/// Runs a program from its initial state until halt. Throws a timeout
/// OracleError carrying the partial state when `fuel` runs out first.
RunResult run(const Program& prog, uint64_t fuel, std::ostream* trace = nullptr);

struct Mismatch {
  std::string location;  // "r7", "f3", "pc", "mem[0x00002000]"
  uint32_t expected;
  uint32_t actual;
};

/// Compares registers and every memory word touched by either state.
std::vector<Mismatch> diff(const ArchState& expected, const ArchState& actual);

std::string format_mismatch(const Mismatch& m);

}  // namespace dsmt
