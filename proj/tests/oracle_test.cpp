#include <gtest/gtest.h>

#include "dsmt/harness.hpp"
#include "dsmt/oracle.hpp"

using namespace dsmt;

namespace {

ArchState one_step(const char* src, void (*setup)(ArchState&)) {
  Program p = assemble(src);
  ArchState s = initial_state(p);
  setup(s);
  return step(s, p);
}

}  // namespace

TEST(Oracle, AddiAdvancesPc) {
  ArchState s = one_step("addi r3, r3, 4\n", [](ArchState& s) { s.int_regs[3] = 100; });
  EXPECT_EQ(s.int_regs[3], 104u);
  EXPECT_EQ(s.pc, default_text_base + 4);
  EXPECT_EQ(s.committed_count, 1u);
}

TEST(Oracle, StoreWritesMemory) {
  ArchState s = one_step("sw r1, 0(r2)\n", [](ArchState& s) {
    s.int_regs[1] = 7;
    s.int_regs[2] = 0x1000;
  });
  EXPECT_EQ(s.load(0x1000), 7u);
}

TEST(Oracle, WritesToR0Vanish) {
  Program p = assemble("addi r0, r0, 9\nlw r0, 0(r0)\n");
  ArchState s = initial_state(p);
  s.memory[0] = 5;
  ArchState t = step(step(s, p), p);
  EXPECT_EQ(t.int_regs, s.int_regs);
  EXPECT_EQ(t.fp_regs, s.fp_regs);
  EXPECT_EQ(t.memory, s.memory);
  EXPECT_EQ(t.pc, s.pc + 8);
}

TEST(Oracle, SumsOneToTen) {
  RunResult r = run(assemble(
                        "      li   r1, 1\n"
                        "      li   r2, 11\n"
                        "top:  add  r5, r5, r1\n"
                        "      addi r1, r1, 1\n"
                        "      blt  r1, r2, top\n"
                        "      halt\n"),
                    1000);
  EXPECT_TRUE(r.state.halted);
  EXPECT_EQ(r.state.int_regs[5], 55u);
  EXPECT_EQ(r.state.committed_count, 4u + 30u + 1u);
}

TEST(Oracle, VaddStoreTraceAndCount) {
  Program p = assemble_file(resolve_kernel("vadd"));
  RunResult r = run(p, oracle_fuel);
  // prologue 14, fill 1036 x 8, reload 10, main 1024 x 14, halt
  EXPECT_EQ(r.state.committed_count, 14u + 1036u * 8u + 10u + 1024u * 14u + 1u);
  ASSERT_EQ(r.stores.size(), 2u * 1036u + 1024u);
  for (size_t k = 0; k < 1024; ++k)
    EXPECT_EQ(r.stores[2 * 1036 + k].addr, 0x10005000u + 4u * k);
}

TEST(Oracle, FuelTimeout) {
  Program p = assemble("top: j top\n");
  try {
    run(p, 1000);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::timeout);
    EXPECT_EQ(e.partial().committed_count, 1000u);
  }
}

TEST(Oracle, Traps) {
  try {
    run(assemble("li r2, 0\ndiv r1, r1, r2\nhalt\n"), 100);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::trap);
  }
  try {
    run(assemble("nop\n"), 100);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::runaway);
  }
}

TEST(Oracle, AdvanceStopsAtHalt) {
  Program p = assemble("nop\nnop\nhalt\n");
  ArchState s = initial_state(p);
  EXPECT_EQ(Oracle(p).advance(s, 100), 3u);
  EXPECT_TRUE(s.halted);
}

TEST(Oracle, DiffIdentical) {
  ArchState a;
  a.memory[0x2000] = 1;
  EXPECT_TRUE(diff(a, a).empty());
}

TEST(Oracle, DiffRegister) {
  ArchState a, b;
  b.int_regs[7] = 3;
  auto d = diff(a, b);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].location, "r7");
  EXPECT_EQ(d[0].actual, 3u);
}

TEST(Oracle, DiffMemory) {
  ArchState a, b;
  a.memory[0x2000] = 4;
  b.memory[0x2000] = 5;
  auto d = diff(a, b);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].expected, 4u);
  EXPECT_EQ(d[0].actual, 5u);
  EXPECT_NE(format_mismatch(d[0]).find("0x00002000"), std::string::npos);
}

TEST(Oracle, AbsentWordEqualsZero) {
  ArchState a, b;
  b.memory[0x40] = 0;
  EXPECT_TRUE(diff(a, b).empty());
}
