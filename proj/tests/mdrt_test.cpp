#include <gtest/gtest.h>

#include "dsmt/mdrt.hpp"

using namespace dsmt;

namespace {

ThreadRing ring4() {
  ThreadRing r(4);
  r.reset(0, 0);
  for (int i = 1; i < 4; ++i) r.clone(i);
  return r;
}

}  // namespace

TEST(Mdrt, LoadAllocatesEntry) {
  Mdrt m(64, 4);
  EXPECT_TRUE(m.record_load(2, 0x2000, 0));
  const MdrtEntry* e = m.find(0x2000);
  ASSERT_NE(e, nullptr);
  EXPECT_TRUE(e->l[2]);
  EXPECT_EQ(m.occupancy(), 1);
}

TEST(Mdrt, PredecessorStoreVisible) {
  ThreadRing r = ring4();
  Mdrt m(64, 4);
  m.record_store(0, 0x3000, 9);
  EXPECT_EQ(m.visible_store(r, 2, 0x3000), 9u);
  m.record_store(1, 0x3000, 5);
  EXPECT_EQ(m.visible_store(r, 2, 0x3000), 5u);
  EXPECT_EQ(m.visible_store(r, 0, 0x3000), 9u);
  EXPECT_FALSE(m.visible_store(r, 2, 0x4000));
}

TEST(Mdrt, YoungerStoreInvisible) {
  ThreadRing r = ring4();
  Mdrt m(64, 4);
  m.record_store(3, 0x3000, 1);
  EXPECT_FALSE(m.visible_store(r, 1, 0x3000));
}

TEST(Mdrt, OneEntryPerAddress) {
  Mdrt m(64, 4);
  m.record_load(1, 0x1000, 0);
  m.record_store(2, 0x1000, 5);
  m.record_load(3, 0x1000, 5);
  EXPECT_EQ(m.occupancy(), 1);
  EXPECT_EQ(m.find(0x1000)->value, 5u);
}

TEST(Mdrt, FullTableRefusesNewAddresses) {
  Mdrt m(2, 4);
  EXPECT_TRUE(m.record_load(1, 0x0, 0));
  EXPECT_TRUE(m.record_load(1, 0x4, 0));
  EXPECT_FALSE(m.can_track(0x8));
  EXPECT_FALSE(m.record_load(1, 0x8, 0));
  EXPECT_FALSE(m.record_store(1, 0x8, 0));
  EXPECT_TRUE(m.record_store(1, 0x8, 0, false));
  EXPECT_TRUE(m.record_load(2, 0x4, 0));
  EXPECT_EQ(m.occupancy(), 2);
  EXPECT_EQ(m.peak(), 2);
}

TEST(Mdrt, HeadStoreSquashesEarlyReader) {
  ThreadRing r = ring4();
  Mdrt m(64, 4);
  m.record_load(1, 0x1000, 0);
  auto s = m.scan_early_reads(r, 0, 0x1000, 5, false);
  EXPECT_EQ(s.squash, 1);
}

TEST(Mdrt, MatchingEarlyReadSurvives) {
  ThreadRing r = ring4();
  Mdrt m(64, 4);
  m.record_load(1, 0x1000, 5);
  auto s = m.scan_early_reads(r, 0, 0x1000, 5, false);
  EXPECT_FALSE(s.squash);
  EXPECT_EQ(s.matched, 1);
  EXPECT_EQ(m.scan_early_reads(r, 0, 0x1000, 5, true).squash, 1);
}

TEST(Mdrt, ConflictingRepeatLoadSquashes) {
  ThreadRing r = ring4();
  Mdrt m(64, 4);
  m.record_load(1, 0x1000, 5);
  m.record_load(1, 0x1000, 6);
  EXPECT_EQ(m.scan_early_reads(r, 0, 0x1000, 5, false).squash, 1);
}

TEST(Mdrt, ScanStopsAtIntermediateStore) {
  ThreadRing r = ring4();
  Mdrt m(64, 4);
  m.record_store(1, 0x1000, 3);
  m.record_load(2, 0x1000, 3);
  EXPECT_FALSE(m.scan_early_reads(r, 0, 0x1000, 7, false).squash);
  EXPECT_FALSE(m.scan_early_reads(r, 0, 0x2000, 7, false).squash);
}

TEST(Mdrt, ClearContextFreesUnreferenced) {
  Mdrt m(64, 4);
  m.record_load(1, 0x1000, 0);
  m.record_load(2, 0x1004, 0);
  m.record_load(1, 0x1004, 0);
  m.clear_context(1);
  EXPECT_EQ(m.find(0x1000), nullptr);
  EXPECT_NE(m.find(0x1004), nullptr);
  EXPECT_EQ(m.occupancy(), 1);
  m.clear();
  EXPECT_EQ(m.occupancy(), 0);
  EXPECT_TRUE(m.entries().empty());
}
