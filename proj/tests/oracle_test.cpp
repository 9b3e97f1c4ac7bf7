#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vecset/errors.hpp"
#include "vecset/oracle.hpp"
#include "vecset/verify.hpp"

using namespace vecset;
using vecset::testing::make_set;
using vecset::testing::params;

TEST(Oracle, SelfIsTop) {
  auto a = make_set(7, {{1, 2}});
  std::vector<VectorSet> db{a};
  auto hits = oracle_top_u(a, db, 1, params(2, 2));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].set_id, 7u);
  EXPECT_NEAR(hits[0].score, 1.0, 1e-7);
}

TEST(Oracle, RanksByFormula) {
  std::vector<VectorSet> db{make_set(1, {{0, 1}}), make_set(2, {{1, 0}, {0, 1}})};
  auto hits = oracle_top_u(make_set(100, {{1, 0}}), db, 2, params(2, 2));
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].set_id, 2u);
  EXPECT_NEAR(hits[0].score, 0.75, 1e-7);
  EXPECT_EQ(hits[1].set_id, 1u);
  EXPECT_NEAR(hits[1].score, 0.0, 1e-7);
}

TEST(Oracle, LargeUReturnsEverything) {
  std::vector<VectorSet> db;
  for (SetId s = 0; s < 5; ++s) db.push_back(random_set(s, 2, 4, s + 10));
  auto hits = oracle_top_u(random_set(99, 2, 4, 1), db, 50, params(4, 2));
  EXPECT_EQ(hits.size(), 5u);
  EXPECT_TRUE(std::is_sorted(hits.begin(), hits.end(), ranks_before));
}

TEST(Oracle, TiesBrokenByAscendingId) {
  std::vector<VectorSet> db{make_set(9, {{1, 0}}), make_set(3, {{1, 0}}), make_set(5, {{1, 0}})};
  auto hits = oracle_top_u(make_set(0, {{1, 0}}), db, 3, params(2, 1));
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].set_id, 3u);
  EXPECT_EQ(hits[1].set_id, 5u);
  EXPECT_EQ(hits[2].set_id, 9u);
}

TEST(Oracle, Errors) {
  std::vector<VectorSet> empty;
  EXPECT_THROW(oracle_top_u(make_set(0, {{1, 0}}), empty, 1, params(2, 1)), InvalidInput);
  std::vector<VectorSet> db{make_set(1, {{1, 0}})};
  EXPECT_THROW(oracle_top_u(make_set(0, {{1, 0}}), db, 0, params(2, 1)), InvalidInput);
  std::vector<VectorSet> bad{make_set(1, {{0, 0}})};
  EXPECT_THROW(OracleIndex(bad, params(2, 1)), DegenerateVector);
}

// Independent re-scan with the scalar formula: scores and top-1 agree.
TEST(Oracle, MatchesScalarRescan) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = trial % 2 ? 8 : 32;
    auto p = random_params(dim, 4, rng());
    std::vector<VectorSet> db;
    for (SetId s = 0; s < 150; ++s) db.push_back(random_set(s, 1 + rng() % 4, dim, rng()));
    auto a = random_set(1000, 1 + rng() % 4, dim, rng());
    OracleIndex oracle(db, p);
    auto hits = oracle.top_u(a, db.size());
    ASSERT_EQ(hits.size(), db.size());
    double best = -2.0;
    for (const auto& s : db) best = std::max(best, set_similarity(a, s, p));
    EXPECT_NEAR(hits[0].score, best, 1e-6);
    for (const auto& h : hits) {
      const auto& s = *std::find_if(db.begin(), db.end(), [&](const auto& x) { return x.id == h.set_id; });
      EXPECT_NEAR(h.score, set_similarity(a, s, p), 1e-6);
    }
  }
}

TEST(Oracle, DeterministicAndBatchConsistent) {
  std::vector<VectorSet> db;
  for (SetId s = 0; s < 100; ++s) db.push_back(random_set(s, 1 + s % 3, 16, s));
  std::vector<VectorSet> queries;
  for (SetId q = 0; q < 12; ++q) queries.push_back(random_set(500 + q, 1 + q % 3, 16, 900 + q));
  auto p = params(16, 3);
  OracleIndex oracle(db, p);
  auto single = oracle.top_u_batch(queries, 10, 1);
  auto threaded = oracle.top_u_batch(queries, 10, 4);
  ASSERT_EQ(single.size(), queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    EXPECT_EQ(single[q], threaded[q]);
    EXPECT_EQ(single[q], oracle.top_u(queries[q], 10));
  }
}

TEST(TopHits, KeepsBestInOrder) {
  std::vector<SearchHit> hits{{4, 0.5}, {1, 0.9}, {2, 0.5}, {3, 0.1}};
  auto top = top_hits(hits, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0], (SearchHit{1, 0.9}));
  EXPECT_EQ(top[1], (SearchHit{2, 0.5}));
  EXPECT_EQ(top[2], (SearchHit{4, 0.5}));
}
