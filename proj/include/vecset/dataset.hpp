#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vecset/core.hpp"
#include "vecset/oracle.hpp"

namespace vecset {

/// Reads an fvecs file: records of (int32 d, d float32), little-endian, uniform d.
std::vector<Vector> load_fvecs(const std::string& path);
void save_fvecs(const std::string& path, const std::vector<Vector>& vectors);

/// Consecutive chunks of n vectors become sets with ids first_id, first_id+1, ...
/// A trailing incomplete chunk is dropped.
std::vector<VectorSet> group_sets(const std::vector<Vector>& vectors, std::size_t n,
                                  SetId first_id = 0);

/// One line of a sets manifest: {"id": <int>, "rows": [<int>, ...]}.
struct ManifestEntry {
  SetId id = 0;
  std::vector<std::size_t> rows;
};

std::vector<ManifestEntry> read_set_manifest(const std::string& path);
void write_set_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

/// Resolves manifest rows against the vectors of an fvecs file.
std::vector<VectorSet> sets_from_manifest(const std::vector<Vector>& vectors,
                                          const std::vector<ManifestEntry>& entries);

/// Writes sets as an fvecs file plus a manifest referencing its rows.
void save_sets(const std::string& fvecs_path, const std::string& manifest_path,
               const std::vector<VectorSet>& sets);
std::vector<VectorSet> load_sets(const std::string& fvecs_path, const std::string& manifest_path);

/// Ground truth: one line per query, {"query": <int>, "hits": [[<set_id>, <score>], ...]}.
struct TruthRecord {
  std::size_t query = 0;
  std::vector<SearchHit> hits;
};

void write_ground_truth(const std::string& path, const std::vector<TruthRecord>& records);
std::vector<TruthRecord> read_ground_truth(const std::string& path);

/// Seeded stand-in for word-embedding data when no real dataset is available.
///
/// Draws `topics` Gaussian centers in R^dim; vectors are emitted in consecutive runs of
/// `run_length` that share a topic (center + isotropic noise of scale `noise`), so that
/// consecutive grouping with N = run_length yields sets of related vectors.
struct SyntheticSpec {
  std::size_t count = 0;
  std::size_t dim = 100;
  std::size_t topics = 2000;
  std::size_t run_length = 3;
  double noise = 1.0;
  std::uint64_t seed = 42;
};

std::vector<Vector> synthetic_vectors(const SyntheticSpec& spec);

/// Vectors of the base and query splits drawn from the same topic centers.
struct SyntheticSplit {
  std::vector<Vector> base;
  std::vector<Vector> queries;
};

SyntheticSplit synthetic_split(const SyntheticSpec& spec, std::size_t query_count);

}  // namespace vecset
