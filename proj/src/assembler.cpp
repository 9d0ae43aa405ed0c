#include "dsmt/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace dsmt {

AsmError::AsmError(int line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<int64_t> parse_int(std::string_view s) {
  s = trim(s);
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return neg ? -v : v;
}

enum class Section { text, data };

struct Statement {
  int line;
  uint32_t addr;
  std::string mnemonic;
  std::vector<std::string> operands;
};

class Assembler {
 public:
  Program run(std::string_view source) {
    first_pass(source);
    Program prog;
    prog.base_address = text_base_;
    prog.labels = labels_;
    for (const auto& st : statements_) emit(st, prog.words);
    finish_data(prog);
    return prog;
  }

 private:
  std::map<std::string, uint32_t> labels_;
  std::vector<Statement> statements_;
  std::vector<std::pair<uint32_t, std::vector<uint32_t>>> data_chunks_;
  uint32_t text_base_ = default_text_base;
  bool text_started_ = false;
  uint32_t text_cursor_ = default_text_base;
  uint32_t data_cursor_ = default_data_base;
  Section section_ = Section::text;

  void define_label(int line, std::string_view name) {
    if (name.empty()) throw AsmError(line, "empty label");
    std::string key(name);
    if (labels_.count(key)) throw AsmError(line, "duplicate label '" + key + "'");
    labels_[key] = section_ == Section::text ? text_cursor_ : data_cursor_;
  }

  void data_word(uint32_t w) {
    if (data_chunks_.empty() ||
        data_chunks_.back().first + data_chunks_.back().second.size() * 4 != data_cursor_)
      data_chunks_.push_back({data_cursor_, {}});
    data_chunks_.back().second.push_back(w);
    data_cursor_ += 4;
  }

  void directive(int line, std::string_view name, std::string_view rest) {
    auto ops = split_operands(rest);
    if (name == ".text") {
      section_ = Section::text;
      if (!ops.empty()) {
        auto v = parse_int(ops[0]);
        if (!v || (*v & 3)) throw AsmError(line, "bad .text address");
        if (text_started_) throw AsmError(line, ".text address after code was emitted");
        text_base_ = text_cursor_ = static_cast<uint32_t>(*v);
      }
    } else if (name == ".data") {
      section_ = Section::data;
      if (!ops.empty()) {
        auto v = parse_int(ops[0]);
        if (!v || (*v & 3)) throw AsmError(line, "bad .data address");
        data_cursor_ = static_cast<uint32_t>(*v);
      }
    } else if (name == ".word" || name == ".float" || name == ".space") {
      if (section_ != Section::data) throw AsmError(line, std::string(name) + " outside .data");
      if (name == ".space") {
        auto n = ops.size() == 1 ? parse_int(ops[0]) : std::nullopt;
        if (!n || *n < 0) throw AsmError(line, "bad .space count");
        for (int64_t i = 0; i < *n; ++i) data_word(0);
        return;
      }
      for (auto op : ops) {
        if (name == ".word") {
          auto v = parse_int(op);
          if (!v || *v < INT32_MIN || *v > UINT32_MAX)
            throw AsmError(line, "bad .word value '" + std::string(op) + "'");
          data_word(static_cast<uint32_t>(*v));
        } else {
          std::string s(op);
          char* end = nullptr;
          float f = std::strtof(s.c_str(), &end);
          if (s.empty() || *end != '\0') throw AsmError(line, "bad .float value '" + s + "'");
          data_word(float_bits(f));
        }
      }
    } else {
      throw AsmError(line, "unknown directive '" + std::string(name) + "'");
    }
  }

  void first_pass(std::string_view source) {
    int line_no = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
      size_t nl = source.find('\n', pos);
      if (nl == std::string_view::npos) nl = source.size();
      std::string_view line = source.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (auto c = line.find_first_of(";#"); c != std::string_view::npos) line = line.substr(0, c);
      line = trim(line);
      while (true) {
        auto colon = line.find(':');
        if (colon == std::string_view::npos) break;
        auto name = trim(line.substr(0, colon));
        if (name.find_first_of(" \t,(") != std::string_view::npos) break;
        define_label(line_no, name);
        line = trim(line.substr(colon + 1));
      }
      if (line.empty()) continue;
      size_t sp = 0;
      while (sp < line.size() && !std::isspace(static_cast<unsigned char>(line[sp]))) ++sp;
      std::string_view mnem = line.substr(0, sp);
      std::string_view rest = line.substr(sp);
      if (mnem.front() == '.') {
        directive(line_no, mnem, rest);
        continue;
      }
      if (section_ != Section::text) throw AsmError(line_no, "instruction inside .data");
      Statement st{line_no, text_cursor_, std::string(mnem), {}};
      std::transform(st.mnemonic.begin(), st.mnemonic.end(), st.mnemonic.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      for (auto op : split_operands(rest)) st.operands.emplace_back(op);
      text_started_ = true;
      text_cursor_ += (st.mnemonic == "li" || st.mnemonic == "la") ? 8 : 4;
      statements_.push_back(std::move(st));
    }
  }

  void finish_data(Program& prog) {
    std::sort(data_chunks_.begin(), data_chunks_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [base, words] : data_chunks_) {
      if (!prog.data.empty() &&
          prog.data.back().base + prog.data.back().words.size() * 4 > base)
        throw AsmError(0, "overlapping data segments");
      if (!prog.data.empty() && prog.data.back().base + prog.data.back().words.size() * 4 == base) {
        auto& w = prog.data.back().words;
        w.insert(w.end(), words.begin(), words.end());
      } else {
        prog.data.push_back({base, std::move(words)});
      }
    }
    uint32_t text_end = prog.end_address();
    for (const auto& seg : prog.data)
      if (seg.base < text_end && seg.base + seg.words.size() * 4 > prog.base_address)
        throw AsmError(0, "data segment overlaps text");
  }

  static int reg(const Statement& st, std::string_view s, char file) {
    s = trim(s);
    if (s.size() < 2 || std::tolower(static_cast<unsigned char>(s[0])) != file)
      throw AsmError(st.line, std::string("expected ") + (file == 'r' ? "integer" : "fp") +
                                  " register, got '" + std::string(s) + "'");
    auto v = parse_int(s.substr(1));
    if (!v || *v < 0 || *v > 31) throw AsmError(st.line, "bad register '" + std::string(s) + "'");
    return static_cast<int>(*v);
  }

  int64_t value(const Statement& st, std::string_view s) const {
    s = trim(s);
    if (auto v = parse_int(s)) return *v;
    auto it = labels_.find(std::string(s));
    if (it == labels_.end()) throw AsmError(st.line, "undefined label '" + std::string(s) + "'");
    return it->second;
  }

  static int32_t imm16(const Statement& st, int64_t v, bool zero_ext) {
    bool ok = zero_ext ? (v >= 0 && v <= 0xFFFF) : (v >= -32768 && v <= 32767);
    if (!ok) throw AsmError(st.line, "immediate " + std::to_string(v) + " out of 16-bit range");
    return static_cast<int32_t>(v);
  }

  static void arity(const Statement& st, size_t n) {
    if (st.operands.size() != n)
      throw AsmError(st.line, "'" + st.mnemonic + "' expects " + std::to_string(n) + " operands");
  }

  // "imm(rs)" memory operand
  std::pair<int32_t, int> mem_operand(const Statement& st, std::string_view s) const {
    auto lp = s.find('(');
    auto rp = s.find(')');
    if (lp == std::string_view::npos || rp == std::string_view::npos || rp < lp)
      throw AsmError(st.line, "bad memory operand '" + std::string(s) + "'");
    auto off_text = trim(s.substr(0, lp));
    int64_t off = off_text.empty() ? 0 : value(st, off_text);
    return {imm16(st, off, false), reg(st, s.substr(lp + 1, rp - lp - 1), 'r')};
  }

  int32_t branch_offset(const Statement& st, std::string_view target, int bits) const {
    auto it = labels_.find(std::string(trim(target)));
    if (it == labels_.end())
      throw AsmError(st.line, "undefined label '" + std::string(trim(target)) + "'");
    if (it->second < text_base_ || it->second >= text_cursor_)
      throw AsmError(st.line, "branch target '" + it->first + "' outside the text image");
    int64_t off = (static_cast<int64_t>(it->second) - (static_cast<int64_t>(st.addr) + 4)) / 4;
    int64_t lim = int64_t{1} << (bits - 1);
    if (off < -lim || off >= lim) throw AsmError(st.line, "branch offset out of range");
    return static_cast<int32_t>(off);
  }

  void emit(const Statement& st, std::vector<uint32_t>& out) const {
    const auto& o = st.operands;
    if (st.mnemonic == "li" || st.mnemonic == "la") {
      arity(st, 2);
      int rd = reg(st, o[0], 'r');
      int64_t v = value(st, o[1]);
      if (v < INT32_MIN || v > UINT32_MAX) throw AsmError(st.line, "li value out of 32-bit range");
      auto u = static_cast<uint32_t>(v);
      out.push_back(encode({Opcode::lui, static_cast<uint8_t>(rd), 0, 0, static_cast<int32_t>(u >> 16)}));
      out.push_back(encode({Opcode::ori, static_cast<uint8_t>(rd), static_cast<uint8_t>(rd), 0,
                            static_cast<int32_t>(u & 0xFFFFu)}));
      return;
    }
    auto op = opcode_from_mnemonic(st.mnemonic);
    if (!op) throw AsmError(st.line, "unknown mnemonic '" + st.mnemonic + "'");
    Instruction inst{*op, 0, 0, 0, 0};
    auto u8 = [](int v) { return static_cast<uint8_t>(v); };
    switch (*op) {
      case Opcode::nop: case Opcode::halt:
        arity(st, 0);
        break;
      case Opcode::add: case Opcode::sub: case Opcode::and_: case Opcode::or_: case Opcode::xor_:
      case Opcode::slt: case Opcode::mul: case Opcode::div: case Opcode::rem:
        arity(st, 3);
        inst.rd = u8(reg(st, o[0], 'r'));
        inst.rs = u8(reg(st, o[1], 'r'));
        inst.rt = u8(reg(st, o[2], 'r'));
        break;
      case Opcode::sll: case Opcode::srl: case Opcode::sra: {
        arity(st, 3);
        inst.rd = u8(reg(st, o[0], 'r'));
        inst.rs = u8(reg(st, o[1], 'r'));
        int64_t sh = value(st, o[2]);
        if (sh < 0 || sh > 31) throw AsmError(st.line, "shift amount out of range");
        inst.imm = static_cast<int32_t>(sh);
        break;
      }
      case Opcode::addi: case Opcode::slti: case Opcode::andi: case Opcode::ori:
        arity(st, 3);
        inst.rd = u8(reg(st, o[0], 'r'));
        inst.rs = u8(reg(st, o[1], 'r'));
        inst.imm = imm16(st, value(st, o[2]), *op == Opcode::andi || *op == Opcode::ori);
        break;
      case Opcode::lui:
        arity(st, 2);
        inst.rd = u8(reg(st, o[0], 'r'));
        inst.imm = imm16(st, value(st, o[1]), true);
        break;
      case Opcode::lw: case Opcode::flw: {
        arity(st, 2);
        inst.rd = u8(reg(st, o[0], *op == Opcode::lw ? 'r' : 'f'));
        auto [off, base] = mem_operand(st, o[1]);
        inst.rs = u8(base);
        inst.imm = off;
        break;
      }
      case Opcode::sw: case Opcode::fsw: {
        arity(st, 2);
        inst.rt = u8(reg(st, o[0], *op == Opcode::sw ? 'r' : 'f'));
        auto [off, base] = mem_operand(st, o[1]);
        inst.rs = u8(base);
        inst.imm = off;
        break;
      }
      case Opcode::fadd: case Opcode::fsub: case Opcode::fmul: case Opcode::fdiv:
        arity(st, 3);
        inst.rd = u8(reg(st, o[0], 'f'));
        inst.rs = u8(reg(st, o[1], 'f'));
        inst.rt = u8(reg(st, o[2], 'f'));
        break;
      case Opcode::flt:
        arity(st, 3);
        inst.rd = u8(reg(st, o[0], 'r'));
        inst.rs = u8(reg(st, o[1], 'f'));
        inst.rt = u8(reg(st, o[2], 'f'));
        break;
      case Opcode::fmov:
        arity(st, 2);
        inst.rd = u8(reg(st, o[0], 'f'));
        inst.rs = u8(reg(st, o[1], 'f'));
        break;
      case Opcode::itof:
        arity(st, 2);
        inst.rd = u8(reg(st, o[0], 'f'));
        inst.rs = u8(reg(st, o[1], 'r'));
        break;
      case Opcode::ftoi:
        arity(st, 2);
        inst.rd = u8(reg(st, o[0], 'r'));
        inst.rs = u8(reg(st, o[1], 'f'));
        break;
      case Opcode::beq: case Opcode::bne: case Opcode::blt:
        arity(st, 3);
        inst.rs = u8(reg(st, o[0], 'r'));
        inst.rt = u8(reg(st, o[1], 'r'));
        inst.imm = branch_offset(st, o[2], 16);
        break;
      case Opcode::j:
        arity(st, 1);
        inst.imm = branch_offset(st, o[0], 26);
        break;
    }
    out.push_back(encode(inst));
  }
};

void put_le(std::vector<uint8_t>& out, uint32_t w) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(w >> (8 * i)));
}

}  // namespace

Program assemble(std::string_view source) { return Assembler{}.run(source); }

Program assemble_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return assemble(ss.str());
  } catch (const AsmError& e) {
    throw AsmError(e.line(), path + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

std::vector<uint8_t> write_image(const Program& prog) {
  std::vector<uint8_t> out;
  auto segment = [&out](uint32_t base, const std::vector<uint32_t>& words) {
    put_le(out, base);
    put_le(out, static_cast<uint32_t>(words.size()));
    for (uint32_t w : words) put_le(out, w);
  };
  segment(prog.base_address, prog.words);
  for (const auto& s : prog.data) segment(s.base, s.words);
  return out;
}

Program read_image(std::span<const uint8_t> bytes) {
  size_t pos = 0;
  auto get = [&]() {
    if (pos + 4 > bytes.size()) throw std::runtime_error("truncated image");
    uint32_t w = 0;
    for (int i = 0; i < 4; ++i) w |= uint32_t{bytes[pos + i]} << (8 * i);
    pos += 4;
    return w;
  };
  Program prog;
  bool first = true;
  while (pos < bytes.size()) {
    uint32_t base = get();
    uint32_t count = get();
    if (base & 3u) throw std::runtime_error("misaligned segment base");
    std::vector<uint32_t> words(count);
    for (auto& w : words) w = get();
    if (first) {
      prog.base_address = base;
      prog.words = std::move(words);
      first = false;
    } else {
      prog.data.push_back({base, std::move(words)});
    }
  }
  if (first) throw std::runtime_error("empty image");
  return prog;
}

}  // namespace dsmt
