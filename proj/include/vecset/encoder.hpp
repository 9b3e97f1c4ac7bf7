#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vecset/core.hpp"

namespace vecset {

/// Shape of a long vector: n*k blocks of dim floats each.
///
/// For a candidate, n is the assumed target cardinality and k = |V|.
/// For a target, n = |A| and k is the assumed candidate cardinality.
struct LongShape {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t dim = 0;

  std::size_t blocks() const { return n * k; }
  std::size_t size() const { return n * k * dim; }
  bool operator==(const LongShape&) const = default;
};

enum class LongKind { candidate, target, selector };

/// Block addressing shared by candidate and target encodings (all indices 0-based).
///
/// With n = |A| and k = |V|, block p of the candidate holds v_j (j = p / n) and block p
/// of the target holds a_i (i = p % n), so block (j*|A| + i) pairs a_i with v_j.
namespace layout {
/// Copy `copy` of candidate member `member`, for a candidate built assuming target cardinality n.
inline std::size_t candidate_block(std::size_t member, std::size_t copy, std::size_t n) {
  return member * n + copy;
}
/// Copy `copy` of target member `member` in a target of cardinality a_card.
inline std::size_t target_block(std::size_t member, std::size_t copy, std::size_t a_card) {
  return copy * a_card + member;
}
/// Block selected by the pair (a_i, v_j).
inline std::size_t pair_block(std::size_t i, std::size_t j, std::size_t a_card) {
  return j * a_card + i;
}
}  // namespace layout

class LongVector {
 public:
  LongVector() = default;
  LongVector(LongShape shape, LongKind kind);
  LongVector(LongShape shape, LongKind kind, std::vector<float> data);

  const LongShape& shape() const { return shape_; }
  LongKind kind() const { return kind_; }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }
  std::span<const float> block(std::size_t p) const;
  std::span<float> block(std::size_t p);

 private:
  LongShape shape_;
  LongKind kind_ = LongKind::candidate;
  std::vector<float> data_;
};

/// n copies of each normalized member of v, members in order: shape (n, |V|, D).
LongVector encode_candidate(const VectorSet& v, std::size_t n, const SimParams& p);

/// The normalized members of a concatenated in order, the whole run repeated k times:
/// shape (|A|, k, D).
LongVector encode_target_base(const VectorSet& a, std::size_t k, const SimParams& p);

/// All zeros except an all-ones block at layout::pair_block(i, j, a_card). 0-based i, j.
LongVector selector(std::size_t i, std::size_t j, std::size_t a_card, std::size_t k,
                    std::size_t dim);

/// Element-wise product; shapes must match.
LongVector hadamard(const LongVector& x, const LongVector& y);

struct TargetVector {
  std::size_t i = 0;  // assumed winning member of the query set
  std::size_t j = 0;  // assumed winning member of the candidate set
  LongVector vec;
};

/// The |A|*k long targets tau_{i,j}^k, ordered j-major (all i for j = 0, then j = 1, ...).
///
/// tau_{i,j} = (w_max * (sigma_{i,j} (*) L_A^k) + w_avg / (|A| k) * L_A^k) / (w_max + w_avg),
/// so that tau_{i,j} . L_V^{|A|} = (w_max cos(a_i, v_j) + w_avg avg(ps)) / (w_max + w_avg)
/// for every V with |V| = k.
std::vector<TargetVector> encode_targets(const VectorSet& a, std::size_t k, const SimParams& p);

/// Inner product of two long vectors of identical shape, accumulated in double.
double dot(const LongVector& x, const LongVector& y);

}  // namespace vecset
