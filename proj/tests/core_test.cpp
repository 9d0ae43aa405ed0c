#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <tuple>

#include "dsmt/core.hpp"
#include "dsmt/harness.hpp"

using namespace dsmt;

namespace {

const std::string kernels[] = {"vadd", "dot", "cond", "first_diff", "stride_irregular", "matmul3"};

Program kernel(const std::string& name) { return assemble_file(resolve_kernel(name)); }

}  // namespace

class CoreStepped : public ::testing::TestWithParam<std::tuple<std::string, int>> {};

// Every cycle obeys the structural and ring invariants, and the run ends
// in the oracle's state.
TEST_P(CoreStepped, InvariantsHoldEveryCycle) {
  auto [name, contexts] = GetParam();
  Program p = kernel(name);
  SimConfig cfg;
  cfg.context_count = contexts;
  Core core(cfg, p, initial_state(p));
  while (core.step()) {
    ASSERT_NO_THROW(core.check_invariants()) << "cycle " << core.cycle();
    if (core.ring().size() > 1) {
      ASSERT_EQ(core.mode(), Mode::full_dsmt);
      ASSERT_TRUE(core.active_loop());
    }
  }
  ASSERT_EQ(core.end_reason(), EndReason::halted);
  RunResult ref = run(p, oracle_fuel);
  auto mism = diff(ref.state, core.arch_state());
  EXPECT_TRUE(mism.empty()) << (mism.empty() ? "" : format_mismatch(mism[0]));
  EXPECT_EQ(core.store_trace(), ref.stores);
  EXPECT_EQ(core.stats().committed, ref.state.committed_count);
}

INSTANTIATE_TEST_SUITE_P(Kernels, CoreStepped,
                         ::testing::Combine(::testing::ValuesIn(kernels), ::testing::Values(1, 2, 4, 8)),
                         [](const auto& info) {
                           return std::get<0>(info.param) + "_" + std::to_string(std::get<1>(info.param));
                         });

TEST(Core, SingleContextNeverClones) {
  SimConfig cfg;
  cfg.context_count = 1;
  auto r = run_experiment(cfg, kernel("vadd"), "vadd");
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_EQ(r.stats.clones, 0u);
  EXPECT_EQ(r.stats.committed_in_dsmt, 0u);
}

TEST(Core, ClonesAndPromotesOnIndependentLoop) {
  SimConfig cfg;
  cfg.context_count = 4;
  auto r = run_experiment(cfg, kernel("vadd"), "vadd");
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_GT(r.stats.clones, 0u);
  EXPECT_GT(r.stats.promotions, 0u);
  EXPECT_GT(r.stats.dsmt_episodes, 0u);
}

TEST(Core, MaxCyclesEndsIncomplete) {
  SimConfig cfg;
  cfg.max_cycles = 500;
  auto r = run_experiment(cfg, kernel("vadd"), "vadd");
  EXPECT_EQ(r.end, EndReason::max_cycles);
  EXPECT_EQ(r.verdict, Verdict::incomplete);
}

TEST(Core, FastSkipStillMatchesOracle) {
  SimConfig cfg;
  cfg.context_count = 4;
  cfg.fast_skip = 5000;
  auto r = run_experiment(cfg, kernel("vadd"), "vadd");
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_EQ(r.stats.committed, r.oracle_committed);
  EXPECT_EQ(r.stats.committed_detailed, r.oracle_committed - 5000);
}

TEST(Core, FastSkipPastHalt) {
  SimConfig cfg;
  cfg.fast_skip = 1'000'000;
  auto r = run_experiment(cfg, assemble("addi r1, r0, 1\nhalt\n"), "tiny");
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(Core, StrictModeStillExact) {
  for (auto name : {"cond", "first_diff"}) {
    SimConfig cfg;
    cfg.context_count = 8;
    cfg.strict_lbit_squash = true;
    auto r = run_experiment(cfg, kernel(name), name);
    EXPECT_EQ(r.verdict, Verdict::pass) << name;
  }
}

TEST(Core, TinyMdrtBackpressureIsExact) {
  SimConfig cfg;
  cfg.context_count = 8;
  cfg.mdrt_capacity = 2;
  for (auto name : {"vadd", "first_diff"}) {
    auto r = run_experiment(cfg, kernel(name), name);
    EXPECT_EQ(r.verdict, Verdict::pass) << name;
    EXPECT_LE(r.stats.mdrt_peak, 2);
  }
}

TEST(Core, IdealFetchExact) {
  SimConfig cfg;
  cfg.context_count = 8;
  cfg.fetch_policy = FetchPolicy::ideal;
  auto r = run_experiment(cfg, kernel("matmul3"), "matmul3");
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(Core, FaultingProgramRejected) {
  SimConfig cfg;
  EXPECT_THROW(run_experiment(cfg, assemble("li r2, 0\ndiv r1, r1, r2\nhalt\n"), "trap"), HarnessError);
}

TEST(Core, CycleTraceWritten) {
  SimConfig cfg;
  std::ostringstream out;
  auto r = run_experiment(cfg, assemble("addi r1, r0, 1\nhalt\n"), "tiny", &out);
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_FALSE(out.str().empty());
}
