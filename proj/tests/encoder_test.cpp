#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vecset/encoder.hpp"
#include "vecset/errors.hpp"
#include "vecset/verify.hpp"

using namespace vecset;
using vecset::testing::make_set;
using vecset::testing::params;

namespace {

std::vector<float> flat(const LongVector& v) { return {v.data().begin(), v.data().end()}; }

void expect_near_all(const LongVector& v, const std::vector<float>& want, float tol = 1e-6f) {
  ASSERT_EQ(v.data().size(), want.size());
  for (std::size_t q = 0; q < want.size(); ++q) EXPECT_NEAR(v.data()[q], want[q], tol) << "at " << q;
}

}  // namespace

TEST(EncodeCandidate, Examples) {
  auto p = params(2, 4);
  auto c = encode_candidate(make_set(1, {{1, 0}}), 2, p);
  EXPECT_EQ(c.shape(), (LongShape{2, 1, 2}));
  EXPECT_EQ(c.kind(), LongKind::candidate);
  EXPECT_EQ(flat(c), (std::vector<float>{1, 0, 1, 0}));

  auto d = encode_candidate(make_set(1, {{3, 0}, {0, 4}}), 1, p);
  EXPECT_EQ(d.shape(), (LongShape{1, 2, 2}));
  EXPECT_EQ(flat(d), (std::vector<float>{1, 0, 0, 1}));

  auto e = encode_candidate(make_set(1, {{1, 1}}), 1, p);
  expect_near_all(e, {0.7071f, 0.7071f}, 1e-4f);
}

TEST(EncodeCandidate, CopiesAreBitIdenticalUnitBlocks) {
  auto p = params(8, 4);
  auto v = random_set(1, 3, 8, 99);
  auto c = encode_candidate(v, 4, p);
  EXPECT_EQ(c.data().size(), 4u * 3u * 8u);
  for (std::size_t j = 0; j < 3; ++j) {
    auto first = c.block(layout::candidate_block(j, 0, 4));
    double n = 0.0;
    for (float x : first) n += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-5);
    for (std::size_t t = 1; t < 4; ++t) {
      auto copy = c.block(layout::candidate_block(j, t, 4));
      EXPECT_TRUE(std::equal(first.begin(), first.end(), copy.begin()));
    }
  }
}

TEST(EncodeCandidate, Errors) {
  auto p = params(2, 2);
  EXPECT_THROW(encode_candidate(make_set(1, {{0, 0}}), 1, p), DegenerateVector);
  EXPECT_THROW(encode_candidate(make_set(1, {{1, 0}}), 0, p), InvalidInput);
  EXPECT_THROW(encode_candidate(make_set(1, {{1, 0}}), 3, p), InvalidInput);
  EXPECT_THROW(encode_candidate(make_set(1, {{1, 0}, {1, 0}, {1, 0}}), 1, p), InvalidInput);
}

TEST(EncodeTargetBase, Examples) {
  auto p = params(2, 4);
  EXPECT_EQ(flat(encode_target_base(make_set(1, {{1, 0}}), 2, p)), (std::vector<float>{1, 0, 1, 0}));
  auto b = encode_target_base(make_set(1, {{1, 0}, {0, 1}}), 1, p);
  EXPECT_EQ(b.shape(), (LongShape{2, 1, 2}));
  EXPECT_EQ(flat(b), (std::vector<float>{1, 0, 0, 1}));
  EXPECT_EQ(flat(encode_target_base(make_set(1, {{0, 5}}), 1, p)), (std::vector<float>{0, 1}));
  EXPECT_THROW(encode_target_base(make_set(1, {{0, 0}}), 1, p), DegenerateVector);
}

TEST(Selector, Examples) {
  EXPECT_EQ(flat(selector(0, 0, 1, 1, 2)), (std::vector<float>{1, 1}));
  EXPECT_EQ(flat(selector(0, 1, 1, 2, 2)), (std::vector<float>{0, 0, 1, 1}));
  // a_2 paired with v_1 among 2 x 2 pairs: offset (0)*2 + 1
  EXPECT_EQ(flat(selector(1, 0, 2, 2, 1)), (std::vector<float>{0, 1, 0, 0}));
  EXPECT_EQ(selector(0, 0, 1, 1, 2).kind(), LongKind::selector);
}

TEST(Selector, ExactlyOneOnesBlock) {
  for (std::size_t a = 1; a <= 3; ++a) {
    for (std::size_t k = 1; k <= 3; ++k) {
      for (std::size_t i = 0; i < a; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          auto s = selector(i, j, a, k, 3);
          std::size_t ones = 0;
          for (std::size_t b = 0; b < a * k; ++b) {
            auto blk = s.block(b);
            bool all1 = std::all_of(blk.begin(), blk.end(), [](float x) { return x == 1.0f; });
            bool all0 = std::all_of(blk.begin(), blk.end(), [](float x) { return x == 0.0f; });
            EXPECT_TRUE(all0 || all1);
            ones += all1;
            if (all1) EXPECT_EQ(b, j * a + i);
          }
          EXPECT_EQ(ones, 1u);
        }
      }
    }
  }
}

TEST(Selector, OutOfRange) {
  EXPECT_THROW(selector(1, 0, 1, 1, 2), InvalidInput);
  EXPECT_THROW(selector(0, 2, 1, 2, 2), InvalidInput);
  EXPECT_THROW(selector(0, 0, 0, 1, 2), InvalidInput);
}

TEST(EncodeTargets, Examples) {
  auto p = params(2, 4);
  auto one = encode_targets(make_set(1, {{1, 0}}), 1, p);
  ASSERT_EQ(one.size(), 1u);
  expect_near_all(one[0].vec, {1, 0});

  auto two = encode_targets(make_set(1, {{1, 0}}), 2, p);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].i, 0u);
  EXPECT_EQ(two[0].j, 0u);
  expect_near_all(two[0].vec, {0.75f, 0, 0.25f, 0});

  auto cand = encode_candidate(make_set(2, {{1, 0}, {0, 1}}), 1, p);
  EXPECT_NEAR(dot(two[0].vec, cand), 0.75, 1e-6);
}

TEST(EncodeTargets, CountAndOrder) {
  auto p = params(4, 4);
  auto a = random_set(1, 3, 4, 7);
  auto t = encode_targets(a, 2, p);
  ASSERT_EQ(t.size(), 6u);
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    EXPECT_EQ(t[idx].j, idx / 3);
    EXPECT_EQ(t[idx].i, idx % 3);
    EXPECT_EQ(t[idx].vec.shape(), (LongShape{3, 2, 4}));
  }
}

TEST(EncodeTargets, MatchesSelectorConstruction) {
  // tau = (w_max * (sigma (*) L_A) + w_avg/(|A|k) * L_A) / (w_max + w_avg), built from parts
  auto p = params(5, 4, 0.7, 1.9);
  auto a = random_set(1, 2, 5, 3);
  const std::size_t k = 3;
  auto base = encode_target_base(a, k, p);
  for (const auto& t : encode_targets(a, k, p)) {
    auto masked = hadamard(selector(t.i, t.j, 2, k, 5), base);
    for (std::size_t q = 0; q < base.data().size(); ++q) {
      double want = (p.w_max * masked.data()[q] + p.w_avg / (2.0 * k) * base.data()[q]) / (p.w_max + p.w_avg);
      EXPECT_NEAR(t.vec.data()[q], want, 1e-6);
    }
  }
}

TEST(Dot, ExamplesAndShapeCheck) {
  auto p = params(2, 4);
  auto la = encode_target_base(make_set(1, {{1, 0}}), 1, p);
  auto lv = encode_candidate(make_set(2, {{1, 0}}), 1, p);
  EXPECT_DOUBLE_EQ(dot(la, lv), 1.0);

  auto a = make_set(1, {{1, 0}});
  auto v = make_set(2, {{1, 0}, {0, 1}});
  EXPECT_NEAR(dot(encode_target_base(a, 2, p), encode_candidate(v, 1, p)), 1.0, 1e-7);

  LongVector zeros({1, 2, 2}, LongKind::selector);
  EXPECT_DOUBLE_EQ(dot(encode_candidate(v, 1, p), zeros), 0.0);

  EXPECT_THROW(dot(encode_candidate(v, 1, p), encode_candidate(v, 2, p)), InvalidInput);
  // same flat length, different (n, k)
  EXPECT_THROW(dot(LongVector({1, 2, 2}, LongKind::target), LongVector({2, 1, 2}, LongKind::candidate)),
               InvalidInput);
}

TEST(LongVectorType, BufferMustMatchShape) {
  EXPECT_THROW(LongVector({1, 2, 2}, LongKind::target, std::vector<float>(3)), InvalidInput);
}

// Identities on random instances: D in {2, 8, 32}, cardinalities 1..4.
TEST(EncoderIdentities, RandomInstances) {
  std::mt19937_64 rng(2024);
  const std::size_t dims[] = {2, 8, 32};
  for (int t = 0; t < 2000; ++t) {
    const std::size_t dim = dims[rng() % 3];
    auto p = random_params(dim, 4, rng());
    auto a = random_set(1, 1 + rng() % 4, dim, rng());
    auto v = random_set(2, 1 + rng() % 4, dim, rng());
    auto ps = pairwise_sims(a, v);
    const double sim = set_similarity(a, v, p);
    auto cand = encode_candidate(v, a.cardinality(), p);

    // average identity
    double avg_dot = dot(encode_target_base(a, v.cardinality(), p), cand);
    EXPECT_NEAR(avg_dot, ps.sum(), 1e-4 * std::max(1.0, std::abs(ps.sum())));

    // selector identity
    auto base = encode_target_base(a, v.cardinality(), p);
    for (std::size_t i = 0; i < a.cardinality(); ++i) {
      for (std::size_t j = 0; j < v.cardinality(); ++j) {
        auto masked = hadamard(selector(i, j, a.cardinality(), v.cardinality(), dim), base);
        EXPECT_NEAR(dot(masked, cand), ps.at(i, j), 1e-5);
      }
    }

    // target identity, score bound and attainment at the best pair
    for (const auto& tv : encode_targets(a, v.cardinality(), p)) {
      double score = dot(tv.vec, cand);
      double want = (p.w_max * ps.at(tv.i, tv.j) + p.w_avg * ps.avg()) / (p.w_max + p.w_avg);
      EXPECT_NEAR(score, want, 1e-5);
      EXPECT_GE(sim, score - 1e-5);
      if (ps.at(tv.i, tv.j) == ps.max()) EXPECT_NEAR(sim, score, 1e-5);
    }
  }
}

TEST(EncoderIdentities, ConstantCardinalityShapes) {
  const std::size_t n = 3;
  auto p = params(4, n);
  auto a = random_set(1, n, 4, 5);
  auto v = random_set(2, n, 4, 6);
  auto cand = encode_candidate(v, n, p);
  EXPECT_EQ(cand.data().size(), n * n * 4);
  auto targets = encode_targets(a, n, p);
  EXPECT_EQ(targets.size(), n * n);
  for (const auto& t : targets) EXPECT_EQ(t.vec.data().size(), n * n * 4);
}
