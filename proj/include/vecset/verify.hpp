#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vecset/core.hpp"
#include "vecset/encoder.hpp"

namespace vecset {

using TargetEncoder =
    std::function<std::vector<TargetVector>(const VectorSet&, std::size_t, const SimParams&)>;

struct VerifyConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
  std::size_t max_card = 4;
  std::vector<std::size_t> dims{2, 8, 32};
  /// Size of the random databases used by the search-level properties.
  std::size_t db_sets = 200;
  std::size_t db_queries = 20;
  double tol = 1e-5;
};

struct PropertyOutcome {
  std::string name;
  std::size_t checks = 0;
  std::size_t violations = 0;
  /// Seed of the first failing trial, when any.
  std::uint64_t counterexample_seed = 0;
  std::string detail;

  bool passed() const { return violations == 0; }
};

struct VerifyReport {
  std::vector<PropertyOutcome> properties;

  bool all_passed() const;
};

/// Random instance helpers shared with the test suites.
VectorSet random_set(SetId id, std::size_t card, std::size_t dim, std::uint64_t seed);
SimParams random_params(std::size_t dim, std::size_t max_card, std::uint64_t seed);

/// Checks the long-vector identities and the search-level guarantees on seeded random
/// instances:
///   average_identity  L_A^{|V|} . L_V^{|A|} = sum(ps)
///   target_identity   tau_{i,j} . L_V = (w_max cos(a_i, v_j) + w_avg avg(ps)) / (w_max + w_avg)
///   score_upper_bound sim(A, V) >= tau_{i,j} . L_V for every (i, j)
///   score_attained    sim(A, V) == tau_{i,j} . L_V at every pair achieving max(ps)
///   top1_exact        flat engine, per_target_r = 1: top-1 similarity equals the oracle's
///   topu_exact        flat engine, per_target_r = 10, rescore: top-10 list equals the oracle's
/// `encoder` replaces encode_targets in the identity checks (fault injection).
VerifyReport run_verification(const VerifyConfig& config, const TargetEncoder& encoder = encode_targets);

/// An encode_targets variant whose selected block is shifted to the wrong pair.
TargetEncoder corrupted_target_encoder();

}  // namespace vecset
