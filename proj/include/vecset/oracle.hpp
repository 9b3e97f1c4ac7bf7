#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vecset/core.hpp"

namespace vecset {

struct SearchHit {
  SetId set_id = 0;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

/// Result order: descending score, ties by ascending set id.
inline bool ranks_before(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.set_id < b.set_id;
}

void sort_hits(std::vector<SearchHit>& hits);

/// Keeps the best `u` hits under ranks_before order.
std::vector<SearchHit> top_hits(std::vector<SearchHit> hits, std::size_t u);

/// Query set with members normalized once, in double precision.
struct NormalizedQuery {
  std::size_t dim = 0;
  std::vector<double> rows;  // |A| x dim

  std::size_t cardinality() const { return dim == 0 ? 0 : rows.size() / dim; }
};

NormalizedQuery normalize_query(const VectorSet& a, const SimParams& p);

/// Exact brute-force set search.
///
/// Member vectors of the whole database are normalized once at construction and kept in one
/// contiguous row-major matrix, so a query is a single pass of |A| x (total members) dot
/// products followed by a per-set max/avg reduction.
class OracleIndex {
 public:
  OracleIndex(std::span<const VectorSet> database, const SimParams& p);

  std::size_t size() const { return ids_.size(); }
  const SimParams& params() const { return params_; }
  SetId id_at(std::size_t s) const { return ids_[s]; }

  /// Exact similarity between a query and the s-th stored set.
  double similarity(const NormalizedQuery& q, std::size_t s) const;

  std::vector<SearchHit> top_u(const VectorSet& a, std::size_t u) const;

  /// Runs top_u for every query, splitting queries across `workers` threads.
  std::vector<std::vector<SearchHit>> top_u_batch(std::span<const VectorSet> queries,
                                                  std::size_t u, std::size_t workers) const;

 private:
  SimParams params_;
  std::vector<SetId> ids_;
  std::vector<std::size_t> offsets_;  // size()+1 row offsets into rows_
  std::vector<float> rows_;
};

/// One-shot convenience: builds an OracleIndex and runs a single query.
std::vector<SearchHit> oracle_top_u(const VectorSet& a, std::span<const VectorSet> database,
                                    std::size_t u, const SimParams& p);

}  // namespace vecset
