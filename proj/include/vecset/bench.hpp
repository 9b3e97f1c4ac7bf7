#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vecset/engine.hpp"
#include "vecset/oracle.hpp"

namespace vecset {

/// |ids(found[..k]) intersect ids(truth[..k])| / k. Order inside the prefixes is ignored.
double recall_at_k(std::span<const SearchHit> found, std::span<const SearchHit> truth, std::size_t k);

struct BenchRow {
  std::size_t k = 0;
  std::size_t probes = 0;
  double recall_mean = 0.0;
  double recall_std = 0.0;
  double latency_ms_mean = 0.0;
  double latency_ms_p95 = 0.0;
  double qps = 0.0;

  bool operator==(const BenchRow&) const = default;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<std::string> warnings;
};

struct BenchConfig {
  std::vector<std::size_t> ks{1, 10};
  /// Ignored by the flat backend, which yields one row per k with probes = 0.
  std::vector<std::size_t> probes{1};
  /// 1 times queries one after another; more runs them through query_batch.
  std::size_t workers = 1;
  std::size_t per_target_r = 0;
  std::optional<bool> rescore;
};

struct LatencyStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
};

/// Nearest-rank p95 and mean.
LatencyStats latency_stats(std::vector<double> samples_ms);

/// Largest leaf count over the engine's indexes (0 for flat).
std::size_t max_leaves(const SetSearchEngine& engine);

/// Recall/latency sweep over (k, probes). truth[q] must hold at least max(ks) hits for
/// queries[q]. Index build and ground truth are outside the timed region.
BenchResult run_benchmark(const SetSearchEngine& engine,
                          const std::vector<std::vector<SearchHit>>& truth,
                          std::span<const VectorSet> queries, const BenchConfig& config);

/// Mean/p95 wall time of the brute-force oracle over the queries.
LatencyStats oracle_latency(const OracleIndex& oracle, std::span<const VectorSet> queries,
                            std::size_t u);

void write_bench_csv(std::ostream& out, const BenchResult& result);
BenchResult read_bench_csv(std::istream& in);

}  // namespace vecset
