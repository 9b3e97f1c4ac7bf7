#include "vecset/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "vecset/errors.hpp"

namespace vecset {

namespace {

constexpr const char* kCsvHeader = "k,probes,recall_mean,recall_std,latency_ms_mean,latency_ms_p95,qps";

}  // namespace

double recall_at_k(std::span<const SearchHit> found, std::span<const SearchHit> truth, std::size_t k) {
  if (k == 0) throw InvalidInput("recall_at_k: k must be positive");
  if (truth.size() < k) {
    throw InvalidInput("recall_at_k: truth has " + std::to_string(truth.size()) + " hits, need " +
                       std::to_string(k));
  }
  std::set<SetId> want;
  for (std::size_t r = 0; r < k; ++r) want.insert(truth[r].set_id);
  std::set<SetId> got;
  for (std::size_t r = 0; r < std::min(k, found.size()); ++r) got.insert(found[r].set_id);
  std::size_t common = 0;
  for (auto id : got) common += want.count(id);
  return static_cast<double>(common) / static_cast<double>(k);
}

LatencyStats latency_stats(std::vector<double> samples_ms) {
  LatencyStats s;
  if (samples_ms.empty()) return s;
  double sum = 0.0;
  for (double x : samples_ms) sum += x;
  s.mean_ms = sum / static_cast<double>(samples_ms.size());
  std::sort(samples_ms.begin(), samples_ms.end());
  auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples_ms.size())));
  s.p95_ms = samples_ms[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

std::size_t max_leaves(const SetSearchEngine& engine) {
  std::size_t m = 0;
  for (auto key : engine.grid_keys()) m = std::max(m, engine.index(key).leaves());
  return m;
}

BenchResult run_benchmark(const SetSearchEngine& engine,
                          const std::vector<std::vector<SearchHit>>& truth,
                          std::span<const VectorSet> queries, const BenchConfig& config) {
  if (queries.empty()) throw InvalidInput("benchmark: no queries");
  if (truth.size() != queries.size()) throw InvalidInput("benchmark: truth/query count mismatch");
  if (config.ks.empty()) throw InvalidInput("benchmark: no k values");
  if (config.probes.empty()) throw InvalidInput("benchmark: empty probes sweep");

  BenchResult result;
  std::vector<std::size_t> sweep;
  if (engine.config().backend == Backend::flat) {
    sweep = {0};
  } else {
    const std::size_t cap = max_leaves(engine);
    for (auto p : config.probes) {
      if (p == 0) throw InvalidInput("benchmark: probes must be positive");
      if (p > cap) {
        result.warnings.push_back("probes " + std::to_string(p) + " exceeds leaves " +
                                  std::to_string(cap) + "; clamped");
        p = cap;
      }
      if (std::find(sweep.begin(), sweep.end(), p) == sweep.end()) sweep.push_back(p);
    }
  }

  for (auto k : config.ks) {
    if (k == 0) throw InvalidInput("benchmark: k must be positive");
    for (auto probes : sweep) {
      QueryOptions opts;
      opts.u = k;
      opts.probes = probes;
      opts.per_target_r = config.per_target_r;
      opts.rescore = config.rescore;

      std::vector<QueryReport> reports;
      double wall_ms = 0.0;
      if (config.workers <= 1) {
        reports.reserve(queries.size());
        for (const auto& q : queries) {
          reports.push_back(engine.query_top_u(q, opts));
          wall_ms += reports.back().latency_ms;
        }
      } else {
        auto t0 = std::chrono::steady_clock::now();
        reports = engine.query_batch(queries, opts, config.workers);
        wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }

      std::vector<double> recalls;
      std::vector<double> latencies;
      for (std::size_t q = 0; q < queries.size(); ++q) {
        recalls.push_back(recall_at_k(reports[q].hits, truth[q], k));
        latencies.push_back(reports[q].latency_ms);
      }
      double mean = 0.0;
      for (double r : recalls) mean += r;
      mean /= static_cast<double>(recalls.size());
      double var = 0.0;
      for (double r : recalls) var += (r - mean) * (r - mean);
      var /= static_cast<double>(recalls.size());

      auto lat = latency_stats(latencies);
      BenchRow row;
      row.k = k;
      row.probes = probes;
      row.recall_mean = mean;
      row.recall_std = std::sqrt(var);
      row.latency_ms_mean = lat.mean_ms;
      row.latency_ms_p95 = lat.p95_ms;
      row.qps = wall_ms > 0.0 ? 1000.0 * static_cast<double>(queries.size()) / wall_ms : 0.0;
      result.rows.push_back(row);
    }
  }
  return result;
}

LatencyStats oracle_latency(const OracleIndex& oracle, std::span<const VectorSet> queries,
                            std::size_t u) {
  std::vector<double> samples;
  samples.reserve(queries.size());
  for (const auto& q : queries) {
    auto t0 = std::chrono::steady_clock::now();
    auto hits = oracle.top_u(q, u);
    samples.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    if (hits.empty()) throw Error("oracle returned no hits");
  }
  return latency_stats(std::move(samples));
}

void write_bench_csv(std::ostream& out, const BenchResult& result) {
  out << kCsvHeader << '\n';
  auto old = out.precision(17);
  for (const auto& r : result.rows) {
    out << r.k << ',' << r.probes << ',' << r.recall_mean << ',' << r.recall_std << ','
        << r.latency_ms_mean << ',' << r.latency_ms_p95 << ',' << r.qps << '\n';
  }
  out.precision(old);
}

BenchResult read_bench_csv(std::istream& in) {
  BenchResult result;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("benchmark CSV: bad header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw FormatError("benchmark CSV line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      BenchRow r;
      r.k = std::stoul(cells[0]);
      r.probes = std::stoul(cells[1]);
      r.recall_mean = std::stod(cells[2]);
      r.recall_std = std::stod(cells[3]);
      r.latency_ms_mean = std::stod(cells[4]);
      r.latency_ms_p95 = std::stod(cells[5]);
      r.qps = std::stod(cells[6]);
      result.rows.push_back(r);
    } catch (const std::exception&) {
      throw FormatError("benchmark CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return result;
}

}  // namespace vecset
