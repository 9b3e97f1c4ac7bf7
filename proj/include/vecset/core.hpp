#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vecset {

using SetId = std::uint64_t;

/// Raw embedding coordinates. Stored unnormalized; normalization happens where it is used.
using Vector = std::vector<float>;

/// Vectors with norm at or below this are rejected.
inline constexpr double kMinNorm = 1e-12;

struct VectorSet {
  SetId id = 0;
  std::vector<Vector> members;

  std::size_t cardinality() const { return members.size(); }
};

/// Weights of the max/avg balanced similarity plus the structural bounds of an engine.
struct SimParams {
  double w_max = 1.0;
  double w_avg = 1.0;
  std::size_t dim = 0;
  std::size_t max_card = 0;

  /// Throws InvalidInput unless weights are nonnegative with positive sum and dim, max_card > 0.
  void validate() const;
};

/// Cosine of every (a_i, v_j) pair, row-major over i.
class PairwiseSims {
 public:
  PairwiseSims(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::span<const double> values() const { return values_; }

  double max() const;
  double min() const;
  double sum() const;
  /// Divides by exactly rows*cols (ps is a multiset).
  double avg() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

double norm(std::span<const float> v);

/// Cosine similarity clamped to [-1, 1]. Accumulates in double.
double cosine(std::span<const float> a, std::span<const float> b);

PairwiseSims pairwise_sims(const VectorSet& a, const VectorSet& v);

/// (w_max*max(ps) + w_avg*avg(ps)) / (w_max + w_avg).
double set_similarity(const VectorSet& a, const VectorSet& v, const SimParams& p);

/// Checks a set against engine bounds: 1 <= |members| <= max_card, every member of
/// dimension dim with norm > kMinNorm.
void validate_set(const VectorSet& s, const SimParams& p);

/// Unit-normalized copy of v. Throws DegenerateVector for near-zero input.
std::vector<double> normalized(std::span<const float> v);

}  // namespace vecset
