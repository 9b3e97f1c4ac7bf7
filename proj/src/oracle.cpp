#include "vecset/oracle.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <thread>

#include "vecset/errors.hpp"
#include "vecset/kernels.hpp"

namespace vecset {

void sort_hits(std::vector<SearchHit>& hits) { std::sort(hits.begin(), hits.end(), ranks_before); }

std::vector<SearchHit> top_hits(std::vector<SearchHit> hits, std::size_t u) {
  if (u < hits.size()) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(u), hits.end(),
                      ranks_before);
    hits.resize(u);
  } else {
    sort_hits(hits);
  }
  return hits;
}

NormalizedQuery normalize_query(const VectorSet& a, const SimParams& p) {
  validate_set(a, p);
  NormalizedQuery q;
  q.dim = p.dim;
  q.rows.reserve(a.members.size() * p.dim);
  for (const auto& m : a.members) {
    auto u = normalized(m);
    q.rows.insert(q.rows.end(), u.begin(), u.end());
  }
  return q;
}

OracleIndex::OracleIndex(std::span<const VectorSet> database, const SimParams& p) : params_(p) {
  p.validate();
  if (database.empty()) throw InvalidInput("oracle: empty database");
  ids_.reserve(database.size());
  offsets_.reserve(database.size() + 1);
  offsets_.push_back(0);
  for (const auto& s : database) {
    validate_set(s, p);
    ids_.push_back(s.id);
    for (const auto& m : s.members) {
      auto u = normalized(m);
      for (double x : u) rows_.push_back(static_cast<float>(x));
    }
    offsets_.push_back(offsets_.back() + s.members.size());
  }
}

double OracleIndex::similarity(const NormalizedQuery& q, std::size_t s) const {
  const std::size_t dim = params_.dim;
  const std::size_t a_card = q.cardinality();
  double best = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t r = offsets_[s]; r < offsets_[s + 1]; ++r) {
    const float* row = rows_.data() + r * dim;
    for (std::size_t i = 0; i < a_card; ++i) {
      double c = std::clamp(kernels::dot_f64(row, q.rows.data() + i * dim, dim), -1.0, 1.0);
      best = std::max(best, c);
      sum += c;
    }
  }
  const double pairs = static_cast<double>(a_card * (offsets_[s + 1] - offsets_[s]));
  return (params_.w_max * best + params_.w_avg * (sum / pairs)) / (params_.w_max + params_.w_avg);
}

std::vector<SearchHit> OracleIndex::top_u(const VectorSet& a, std::size_t u) const {
  if (u == 0) throw InvalidInput("oracle: u must be positive");
  auto q = normalize_query(a, params_);
  std::vector<SearchHit> hits(ids_.size());
  for (std::size_t s = 0; s < ids_.size(); ++s) hits[s] = {ids_[s], similarity(q, s)};
  return top_hits(std::move(hits), u);
}

std::vector<std::vector<SearchHit>> OracleIndex::top_u_batch(std::span<const VectorSet> queries,
                                                             std::size_t u,
                                                             std::size_t workers) const {
  std::vector<std::vector<SearchHit>> out(queries.size());
  workers = std::max<std::size_t>(1, std::min(workers, queries.size()));
  if (workers == 1) {
    for (std::size_t q = 0; q < queries.size(); ++q) out[q] = top_u(queries[q], u);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t q = w; q < queries.size(); q += workers) out[q] = top_u(queries[q], u);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<SearchHit> oracle_top_u(const VectorSet& a, std::span<const VectorSet> database,
                                    std::size_t u, const SimParams& p) {
  return OracleIndex(database, p).top_u(a, u);
}

}  // namespace vecset
