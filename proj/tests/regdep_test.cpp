#include <gtest/gtest.h>

#include <vector>

#include "dsmt/regdep.hpp"

using namespace dsmt;

namespace {

struct Fixture {
  ThreadRing ring{4};
  std::vector<RegisterFile> files = std::vector<RegisterFile>(4);
  RegMask d_anchor;
  ReadConfidenceTable conf;

  Fixture() {
    ring.reset(0, 0);
    for (int i = 1; i < 4; ++i) ring.clone(i);
  }
  ReadResolution read(int ctx, int reg, bool pending = false) {
    ReadQuery q{ring, files, d_anchor, conf, 2};
    return resolve_read(q, ctx, reg, pending);
  }
};

}  // namespace

TEST(ResolveRead, OwnCommittedValue) {
  Fixture f;
  f.files[2][5].r = true;
  f.d_anchor.set(5);
  auto r = f.read(2, 5);
  EXPECT_EQ(r.source, ReadSource::own_value);
  EXPECT_FALSE(r.set_l);
}

TEST(ResolveRead, PendingProducerForwards) {
  Fixture f;
  f.d_anchor.set(5);
  EXPECT_EQ(f.read(2, 5, true).source, ReadSource::own_pending);
}

TEST(ResolveRead, LevelOneTakesPredecessorValue) {
  Fixture f;
  f.d_anchor.set(5);
  f.files[1][5].r = true;
  auto r = f.read(2, 5);
  EXPECT_EQ(r.source, ReadSource::from_predecessor);
  EXPECT_EQ(r.src_ctx, 1);
  EXPECT_TRUE(r.set_l);
}

TEST(ResolveRead, LevelOneWaitsForPredecessor) {
  Fixture f;
  f.d_anchor.set(5);
  EXPECT_EQ(f.read(2, 5).source, ReadSource::stall);
}

TEST(ResolveRead, LevelTwoSearchesBack) {
  Fixture f;
  f.d_anchor.set(5);
  f.ring.set_joined(1);
  f.files[0][5].r = true;
  auto r = f.read(2, 5);
  EXPECT_EQ(r.source, ReadSource::from_predecessor);
  EXPECT_EQ(r.src_ctx, 0);
}

TEST(ResolveRead, NoWriterFallsBackToCloneCopy) {
  Fixture f;
  auto r = f.read(2, 7);
  EXPECT_EQ(r.source, ReadSource::own_value);
  EXPECT_TRUE(r.set_l);
}

TEST(ResolveRead, LowConfidenceWaits) {
  Fixture f;
  f.conf.update(7, false);
  EXPECT_EQ(f.read(2, 7).source, ReadSource::stall);
  f.ring.set_joined(1);
  EXPECT_EQ(f.read(2, 7).source, ReadSource::own_value);
}

TEST(ResolveRead, HeadAndR0ReadOwn) {
  Fixture f;
  f.d_anchor.set(5);
  EXPECT_EQ(f.read(0, 5).source, ReadSource::own_value);
  EXPECT_FALSE(f.read(0, 5).set_l);
  EXPECT_EQ(f.read(2, 0).source, ReadSource::own_value);
}

TEST(ResolveRead, LatchedInputIsReused) {
  Fixture f;
  f.d_anchor.set(5);
  f.files[2][5].l = true;
  EXPECT_EQ(f.read(2, 5).source, ReadSource::own_value);
}

TEST(EarlyReads, MatchingValueIsSilent) {
  Fixture f;
  f.files[1][5] = {42, false, false, true, false, 42};
  auto s = scan_early_reads(f.ring, f.files, 0, 5, 42, false);
  EXPECT_FALSE(s.squash);
  EXPECT_EQ(s.matched, 1);
}

TEST(EarlyReads, MismatchSquashes) {
  Fixture f;
  f.files[1][5] = {40, false, false, true, false, 40};
  auto s = scan_early_reads(f.ring, f.files, 0, 5, 42, false);
  EXPECT_EQ(s.squash, 1);
  EXPECT_FALSE(s.seed);
}

TEST(EarlyReads, StrictSquashesAnyRead) {
  Fixture f;
  f.files[1][5] = {42, false, false, true, false, 42};
  EXPECT_EQ(scan_early_reads(f.ring, f.files, 0, 5, 42, true).squash, 1);
  f.files[1][5].lsst_seed = true;
  EXPECT_FALSE(scan_early_reads(f.ring, f.files, 0, 5, 42, true).squash);
}

TEST(EarlyReads, StopsAtRedefinition) {
  Fixture f;
  f.files[1][5].r = true;
  f.files[2][5] = {1, false, false, true, false, 1};
  EXPECT_FALSE(scan_early_reads(f.ring, f.files, 0, 5, 9, false).squash);
}

TEST(EarlyReads, SkipsUninvolvedThreads) {
  Fixture f;
  f.files[3][5] = {1, false, false, true, true, 1};
  auto s = scan_early_reads(f.ring, f.files, 0, 5, 9, false);
  EXPECT_EQ(s.squash, 3);
  EXPECT_TRUE(s.seed);
}

TEST(EarlyReads, R0NeverSquashes) {
  Fixture f;
  f.files[1][0].l = true;
  f.files[1][0].read_value = 3;
  EXPECT_FALSE(scan_early_reads(f.ring, f.files, 0, 0, 9, true).squash);
}

TEST(Transfer, SkipsOwnResults) {
  RegisterFile from{}, to{};
  from[5].value = 11;
  from[6].value = 12;
  to[5] = {99, true, false, false, false, 0};
  transfer_registers(from, to);
  EXPECT_EQ(to[5].value, 99u);
  EXPECT_EQ(to[6].value, 12u);
}

TEST(Transfer, InputMismatches) {
  RegisterFile succ{}, pred{};
  pred[4].value = 8;
  pred[9].value = 1;
  succ[4].l = true;
  succ[4].read_value = 8;
  succ[9].l = true;
  succ[9].read_value = 2;
  EXPECT_EQ(input_mismatches(succ, pred), (std::vector<int>{9}));
}

TEST(Confidence, TableSaturates) {
  ReadConfidenceTable t(2);
  for (int i = 0; i < 5; ++i) t.update(3, true);
  EXPECT_EQ(t.value(3), 3);
  for (int i = 0; i < 5; ++i) t.update(3, false);
  EXPECT_EQ(t.value(3), 0);
  t.reset(2);
  EXPECT_EQ(t.value(3), 2);
}
