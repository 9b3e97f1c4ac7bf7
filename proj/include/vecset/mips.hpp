#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vecset/encoder.hpp"
#include "vecset/oracle.hpp"

namespace vecset {

enum class Backend { flat, ivf };

const char* backend_name(Backend b);
Backend parse_backend(const std::string& s);

/// Inverted-file parameters. leaves == 0 means round(sqrt(entries)).
struct IvfParams {
  std::size_t leaves = 0;
  std::size_t probes = 1;
  std::size_t kmeans_iters = 20;
  std::uint64_t seed = 42;

  void validate() const;
};

std::size_t default_leaves(std::size_t entries);

struct MipsEntry {
  SetId id = 0;
  LongVector vec;
};

/// Maximum-inner-product search over long vectors of one shape.
///
/// The flat variant scans everything. The ivf variant clusters entries with seeded
/// Euclidean k-means and, per query, scans only the posting lists whose centroids have
/// the largest inner product with the query. Immutable once built.
class MipsIndex {
 public:
  static MipsIndex build_flat(std::vector<MipsEntry> entries);
  static MipsIndex build_ivf(std::vector<MipsEntry> entries, const IvfParams& params,
                             std::size_t workers = 1);

  Backend backend() const { return backend_; }
  const LongShape& shape() const { return shape_; }
  std::size_t size() const { return ids_.size(); }
  /// Number of centroids (0 for flat).
  std::size_t leaves() const { return list_offsets_.empty() ? 0 : list_offsets_.size() - 1; }
  std::span<const float> centroid(std::size_t c) const;
  /// Set ids per posting list, in centroid order.
  std::vector<std::vector<SetId>> posting_lists() const;

  /// Posting lists a query would scan: nonempty lists ordered by descending centroid inner
  /// product (ties by list index), truncated to `probes`.
  std::vector<std::size_t> probe_lists(const LongVector& query, std::size_t probes) const;

  /// Top `top_r` entries by inner product. Flat ignores `probes`.
  std::vector<SearchHit> search(const LongVector& query, std::size_t top_r,
                                std::size_t probes) const;

  /// Same result as calling search() per query; each stored vector is read once per
  /// batch and scored against every query that probes it.
  std::vector<std::vector<SearchHit>> search_batch(std::span<const LongVector> queries,
                                                   std::size_t top_r, std::size_t probes) const;

  void save(const std::string& path) const;
  static MipsIndex load(const std::string& path);

 private:
  MipsIndex() = default;
  void check_query(const LongVector& q) const;
  const float* row(std::size_t e) const { return data_.data() + e * shape_.size(); }

  Backend backend_ = Backend::flat;
  LongShape shape_;
  std::vector<SetId> ids_;            // storage order
  std::vector<float> data_;           // size() x shape_.size(), storage order
  std::vector<float> centroids_;      // leaves() x shape_.size()
  std::vector<std::size_t> list_offsets_;  // ivf: storage range of each posting list
};

}  // namespace vecset
