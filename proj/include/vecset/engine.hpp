#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vecset/core.hpp"
#include "vecset/mips.hpp"
#include "vecset/oracle.hpp"

namespace vecset {

/// (n, k): assumed target cardinality and candidate cardinality of one search structure.
struct GridKey {
  std::size_t n = 0;
  std::size_t k = 0;

  auto operator<=>(const GridKey&) const = default;
};

struct EngineConfig {
  SimParams params;
  Backend backend = Backend::flat;
  /// leaves == 0 picks round(sqrt(size)) per index; leaves are clamped to each index size.
  /// probes is the default for queries that do not set it.
  IvfParams ivf;
  /// Query cardinalities to materialize. Empty means: the cardinalities present in the data.
  std::vector<std::size_t> target_cards;
  /// Threads used by k-means assignment during seal().
  std::size_t build_workers = 1;
};

struct QueryOptions {
  std::size_t u = 10;
  /// 0 uses the engine's configured default.
  std::size_t probes = 0;
  /// 0 means max(u, 10).
  std::size_t per_target_r = 0;
  /// Unset: rescore for the ivf backend only.
  std::optional<bool> rescore;
};

struct QueryReport {
  std::vector<SearchHit> hits;
  std::size_t probes_used = 0;
  std::size_t targets_issued = 0;
  std::size_t candidates_scored = 0;
  double latency_ms = 0.0;
};

struct IngestSummary {
  std::size_t sets = 0;
  std::map<std::size_t, std::size_t> by_cardinality;
};

/// Set-to-set similarity search over the (n, k) grid of long-vector MIPS structures.
///
/// Sets are ingested, then seal() encodes every stored set V once per materialized target
/// cardinality n and builds one index per (n, |V|). A query A probes the indexes (|A|, k)
/// for every stored cardinality k with the |A|*k long targets, pools the winners and ranks
/// them. The engine is immutable after seal() and safe to query concurrently.
class SetSearchEngine {
 public:
  explicit SetSearchEngine(EngineConfig config);

  /// Validates and catalogs sets. Encoding is deferred to seal().
  IngestSummary ingest(std::vector<VectorSet> sets);

  void seal();
  bool sealed() const { return sealed_; }

  QueryReport query_top_u(const VectorSet& a, const QueryOptions& opts) const;

  /// Queries distributed round-robin over `workers` threads; output is in query order.
  std::vector<QueryReport> query_batch(std::span<const VectorSet> queries,
                                       const QueryOptions& opts, std::size_t workers) const;

  const EngineConfig& config() const { return config_; }
  const SimParams& params() const { return config_.params; }
  const std::set<std::size_t>& target_cards() const { return target_cards_; }
  const std::set<std::size_t>& candidate_cards() const { return candidate_cards_; }
  std::vector<GridKey> grid_keys() const;
  const MipsIndex& index(GridKey key) const;
  std::span<const VectorSet> catalog() const { return sets_; }
  /// Expected number of long targets for a query of cardinality a_card.
  std::size_t targets_for(std::size_t a_card) const;

  /// Writes manifest.json, the set catalog and one index file per grid key into `dir`.
  void save(const std::string& dir) const;
  static SetSearchEngine load(const std::string& dir);

 private:
  void finish_seal();

  EngineConfig config_;
  std::vector<VectorSet> sets_;
  std::unordered_map<SetId, std::size_t> slot_of_;
  std::set<std::size_t> target_cards_;
  std::set<std::size_t> candidate_cards_;
  std::map<GridKey, MipsIndex> grid_;
  std::unique_ptr<OracleIndex> exact_;
  bool sealed_ = false;
};

}  // namespace vecset
