#include <random>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vecset/engine.hpp"
#include "vecset/errors.hpp"
#include "vecset/verify.hpp"

using namespace vecset;
using vecset::testing::make_set;
using vecset::testing::params;

namespace {

EngineConfig config(SimParams p, Backend backend = Backend::flat, std::vector<std::size_t> targets = {}) {
  EngineConfig c;
  c.params = p;
  c.backend = backend;
  c.target_cards = std::move(targets);
  return c;
}

std::vector<VectorSet> random_db(std::size_t count, std::size_t dim, std::size_t max_card,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<VectorSet> db;
  for (SetId s = 0; s < count; ++s) db.push_back(random_set(s, 1 + rng() % max_card, dim, rng()));
  return db;
}

const VectorSet& by_id(const std::vector<VectorSet>& db, SetId id) {
  return *std::find_if(db.begin(), db.end(), [&](const auto& s) { return s.id == id; });
}

}  // namespace

TEST(Ingest, EncodingsPerTargetCardinality) {
  SetSearchEngine e(config(params(2, 3), Backend::flat, {1, 2, 3}));
  auto summary = e.ingest({make_set(1, {{1, 0}, {0, 1}})});
  EXPECT_EQ(summary.sets, 1u);
  EXPECT_EQ(summary.by_cardinality.at(2), 1u);
  e.seal();
  auto keys = e.grid_keys();
  EXPECT_EQ(keys, (std::vector<GridKey>{{1, 2}, {2, 2}, {3, 2}}));
  for (auto key : keys) EXPECT_EQ(e.index(key).size(), 1u);
}

TEST(Ingest, GridOnlyForPresentCardinalities) {
  SetSearchEngine e(config(params(2, 3), Backend::flat, {2}));
  e.ingest({make_set(1, {{1, 0}}), make_set(2, {{1, 0}, {0, 1}, {1, 1}})});
  e.seal();
  EXPECT_EQ(e.grid_keys(), (std::vector<GridKey>{{2, 1}, {2, 3}}));
}

TEST(Ingest, Errors) {
  SetSearchEngine e(config(params(2, 2)));
  EXPECT_THROW(e.ingest({}), InvalidInput);
  EXPECT_THROW(e.ingest({make_set(1, {{1, 0}, {0, 1}, {1, 1}})}), InvalidInput);
  EXPECT_THROW(e.ingest({make_set(1, {{0, 0}})}), DegenerateVector);
  e.ingest({make_set(1, {{1, 0}})});
  EXPECT_THROW(e.ingest({make_set(1, {{0, 1}})}), Conflict);
  EXPECT_THROW(e.ingest({make_set(2, {{0, 1}}), make_set(2, {{1, 1}})}), Conflict);
  EXPECT_THROW(SetSearchEngine(config(params(2, 2), Backend::flat, {3})), InvalidInput);
}

TEST(Seal, Lifecycle) {
  SetSearchEngine empty(config(params(2, 2)));
  EXPECT_THROW(empty.seal(), InvalidInput);

  SetSearchEngine e(config(params(2, 2)));
  e.ingest({make_set(1, {{1, 0}})});
  EXPECT_THROW(e.query_top_u(make_set(9, {{1, 0}}), {}), StateError);
  e.seal();
  EXPECT_TRUE(e.sealed());
  EXPECT_EQ(e.index(GridKey{1, 1}).backend(), Backend::flat);
  EXPECT_THROW(e.seal(), StateError);
  EXPECT_THROW(e.ingest({make_set(2, {{1, 0}})}), StateError);
}

TEST(Seal, IvfLeavesClampedToIndexSize) {
  auto c = config(params(4, 2), Backend::ivf);
  c.ivf.leaves = 50;
  c.ivf.probes = 50;
  SetSearchEngine e(c);
  e.ingest(random_db(30, 4, 2, 1));
  e.seal();
  for (auto key : e.grid_keys()) {
    EXPECT_EQ(e.index(key).backend(), Backend::ivf);
    EXPECT_LE(e.index(key).leaves(), e.index(key).size());
  }
}

TEST(Query, SmallExample) {
  SetSearchEngine e(config(params(2, 2)));
  e.ingest({make_set(2, {{1, 0}, {0, 1}}), make_set(1, {{0, 1}})});
  e.seal();
  QueryOptions o;
  o.u = 1;
  auto r = e.query_top_u(make_set(100, {{1, 0}}), o);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0].set_id, 2u);
  EXPECT_NEAR(r.hits[0].score, 0.75, 1e-6);
  EXPECT_EQ(r.targets_issued, 1u * (1 + 2));
}

TEST(Query, IdenticalSetWins) {
  auto db = random_db(50, 8, 1, 3);
  SetSearchEngine e(config(params(8, 1)));
  e.ingest(db);
  e.seal();
  QueryOptions o;
  o.u = 1;
  o.per_target_r = 1;
  o.rescore = false;
  auto r = e.query_top_u(db[17], o);
  EXPECT_EQ(r.hits[0].set_id, db[17].id);
  EXPECT_NEAR(r.hits[0].score, 1.0, 1e-5);
}

TEST(Query, UnsupportedCardinality) {
  SetSearchEngine e(config(params(2, 3), Backend::flat, {1}));
  e.ingest({make_set(1, {{1, 0}})});
  e.seal();
  EXPECT_THROW(e.query_top_u(make_set(9, {{1, 0}, {0, 1}}), {}), UnsupportedCardinality);
  EXPECT_THROW(e.query_top_u(make_set(9, {{1, 0}, {0, 1}, {1, 1}, {1, 2}}), {}), UnsupportedCardinality);
  QueryOptions zero;
  zero.u = 0;
  EXPECT_THROW(e.query_top_u(make_set(9, {{1, 0}}), zero), InvalidInput);
}

TEST(Query, CountersMatchClosedForm) {
  auto db = random_db(60, 4, 3, 9);
  SetSearchEngine e(config(params(4, 3), Backend::flat, {1, 2, 3}));
  e.ingest(db);
  e.seal();
  std::size_t sum_k = 0;
  for (auto k : e.candidate_cards()) sum_k += k;
  for (std::size_t a = 1; a <= 3; ++a) {
    auto r = e.query_top_u(random_set(500, a, 4, a), {});
    EXPECT_EQ(r.targets_issued, a * sum_k);
    EXPECT_EQ(r.targets_issued, e.targets_for(a));
    EXPECT_GE(r.candidates_scored, r.hits.size());
    EXPECT_GE(r.latency_ms, 0.0);
    EXPECT_EQ(r.probes_used, 0u);
  }
}

TEST(Query, ConstantCardinalityHasOneStructure) {
  SetSearchEngine e(config(params(4, 3)));
  std::vector<VectorSet> db;
  for (SetId s = 0; s < 20; ++s) db.push_back(random_set(s, 3, 4, s));
  e.ingest(db);
  e.seal();
  EXPECT_EQ(e.grid_keys(), (std::vector<GridKey>{{3, 3}}));
  EXPECT_EQ(e.query_top_u(random_set(99, 3, 4, 99), {}).targets_issued, 9u);
}

// Mixed cardinalities 1..M, flat backend.
class ExactEquivalence : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(ExactEquivalence, Top1AndScoreBounds) {
  std::mt19937_64 rng(GetParam());
  const std::size_t dim = 8;
  auto p = random_params(dim, 4, rng());
  auto db = random_db(300, dim, 4, rng());
  SetSearchEngine e(config(p, Backend::flat, {1, 2, 3, 4}));
  e.ingest(db);
  e.seal();
  OracleIndex oracle(db, p);
  for (int q = 0; q < 25; ++q) {
    auto a = random_set(10000 + q, 1 + rng() % 4, dim, rng());
    auto truth = oracle.top_u(a, 10);

    QueryOptions one;
    one.u = 1;
    one.per_target_r = 1;
    one.rescore = false;
    auto r = e.query_top_u(a, one);
    ASSERT_EQ(r.hits.size(), 1u);
    double true_sim = set_similarity(a, by_id(db, r.hits[0].set_id), p);
    EXPECT_NEAR(true_sim, truth[0].score, 1e-5);
    EXPECT_NEAR(r.hits[0].score, true_sim, 1e-5);

    // every non-rescored score is a lower bound of the true similarity
    QueryOptions raw;
    raw.u = 30;
    raw.per_target_r = 5;
    raw.rescore = false;
    for (const auto& h : e.query_top_u(a, raw).hits) {
      EXPECT_LE(h.score, set_similarity(a, by_id(db, h.set_id), p) + 1e-5);
    }

    QueryOptions many;
    many.u = 10;
    many.per_target_r = 10;
    many.rescore = true;
    auto list = e.query_top_u(a, many).hits;
    ASSERT_EQ(list.size(), truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      EXPECT_EQ(list[i].set_id, truth[i].set_id);
      EXPECT_NEAR(list[i].score, truth[i].score, 1e-5);
    }

    // rescoring does not change the winner
    QueryOptions rescored = one;
    rescored.rescore = true;
    EXPECT_EQ(e.query_top_u(a, rescored).hits[0].set_id, r.hits[0].set_id);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ExactEquivalence, ::testing::Values(1, 2, 3));

TEST(Query, FullRankingMatchesOracle) {
  auto p = params(6, 3, 1.0, 1.0);
  auto db = random_db(40, 6, 3, 17);
  SetSearchEngine e(config(p));
  e.ingest(db);
  e.seal();
  auto a = random_set(500, db[0].cardinality(), 6, 5);
  QueryOptions o;
  o.u = db.size();
  o.per_target_r = db.size();
  o.rescore = true;
  EXPECT_EQ(e.query_top_u(a, o).hits, OracleIndex(db, p).top_u(a, db.size()));
}

TEST(Query, IvfExhaustiveProbesMatchFlat) {
  auto p = params(8, 3);
  auto db = random_db(400, 8, 3, 23);
  auto cf = config(p, Backend::flat);
  auto ci = config(p, Backend::ivf);
  ci.ivf.leaves = 8;
  SetSearchEngine flat(cf), ivf(ci);
  flat.ingest(db);
  ivf.ingest(db);
  flat.seal();
  ivf.seal();
  for (int q = 0; q < 10; ++q) {
    auto a = random_set(900 + q, 1 + q % 3, 8, 40 + q);
    QueryOptions o;
    o.u = 10;
    o.rescore = true;
    auto want = flat.query_top_u(a, o).hits;
    o.probes = 8;
    auto got = ivf.query_top_u(a, o);
    EXPECT_EQ(got.hits, want);
    EXPECT_EQ(got.probes_used, 8u);
  }
}

TEST(Query, BatchMatchesSequential) {
  auto p = params(8, 2);
  auto db = random_db(200, 8, 2, 5);
  auto c = config(p, Backend::ivf);
  c.ivf.probes = 3;
  SetSearchEngine e(c);
  e.ingest(db);
  e.seal();
  std::vector<VectorSet> queries;
  for (SetId q = 0; q < 15; ++q) queries.push_back(random_set(1000 + q, 1 + q % 2, 8, q));
  QueryOptions o;
  o.u = 5;
  auto batch = e.query_batch(queries, o, 4);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    EXPECT_EQ(batch[q].hits, e.query_top_u(queries[q], o).hits);
  }
}

TEST(Persistence, EngineRoundTrip) {
  vecset::testing::TempDir dir("engine");
  auto p = params(8, 3, 0.5, 2.0);
  auto db = random_db(150, 8, 3, 77);
  auto c = config(p, Backend::ivf, {1, 3});
  c.ivf.leaves = 6;
  c.ivf.probes = 2;
  SetSearchEngine e(c);
  e.ingest(db);
  e.seal();
  e.save(dir.path().string());

  auto back = SetSearchEngine::load(dir.path().string());
  EXPECT_TRUE(back.sealed());
  EXPECT_EQ(back.grid_keys(), e.grid_keys());
  EXPECT_EQ(back.target_cards(), e.target_cards());
  EXPECT_EQ(back.candidate_cards(), e.candidate_cards());
  EXPECT_EQ(back.params().w_avg, 2.0);
  ASSERT_EQ(back.catalog().size(), db.size());
  for (std::size_t s = 0; s < db.size(); ++s) {
    EXPECT_EQ(back.catalog()[s].id, db[s].id);
    EXPECT_EQ(back.catalog()[s].members, db[s].members);
  }
  for (int q = 0; q < 10; ++q) {
    auto a = random_set(700 + q, q % 2 ? 1 : 3, 8, q);
    QueryOptions o;
    o.u = 7;
    EXPECT_EQ(back.query_top_u(a, o).hits, e.query_top_u(a, o).hits);
  }
  EXPECT_THROW(SetSearchEngine::load(dir.file("nope")), FormatError);
}
