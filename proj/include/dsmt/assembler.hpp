#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsmt/isa.hpp"

namespace dsmt {

inline constexpr uint32_t default_text_base = 0x00400000u;
inline constexpr uint32_t default_data_base = 0x10000000u;

struct Segment {
  uint32_t base = 0;
  std::vector<uint32_t> words;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Text image plus initialized data. Addresses are byte addresses; every
/// segment is word aligned.
struct Program {
  uint32_t base_address = default_text_base;
  std::vector<uint32_t> words;
  std::vector<Segment> data;
  std::map<std::string, uint32_t> labels;

  uint32_t end_address() const { return base_address + static_cast<uint32_t>(words.size()) * 4u; }
  bool contains(uint32_t pc) const {
    return pc >= base_address && pc < end_address() && (pc & 3u) == 0;
  }
  uint32_t word_at(uint32_t pc) const { return words[(pc - base_address) / 4u]; }
};

class AsmError : public std::runtime_error {
 public:
  AsmError(int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

/// Assembles one source listing. Syntax: one statement per line, `label:`
/// definitions, `;` or `#` comments, directives `.text [addr]`,
/// `.data [addr]`, `.word v,...`, `.float f,...`, `.space n` (zero words).
/// Pseudo-ops: `li rd, imm32`, `la rd, label` (always lui + ori).
Program assemble(std::string_view source);

Program assemble_file(const std::string& path);

/// Binary image: a sequence of segments, each a little-endian header
/// (base address, word count) followed by the words. The text segment is
/// always first.
std::vector<uint8_t> write_image(const Program& prog);
Program read_image(std::span<const uint8_t> bytes);

}  // namespace dsmt
