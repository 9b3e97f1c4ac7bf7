#include "vecset/dataset.hpp"

#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "vecset/errors.hpp"

namespace vecset {

using nlohmann::json;

std::vector<Vector> load_fvecs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<Vector> out;
  std::int32_t d = 0;
  std::size_t record = 0;
  while (binio::try_read(in, d, path + " record " + std::to_string(record) + " header")) {
    if (d <= 0) {
      throw FormatError(path + ": record " + std::to_string(record) + " has invalid dimension " +
                        std::to_string(d));
    }
    if (!out.empty() && static_cast<std::size_t>(d) != out.front().size()) {
      throw FormatError(path + ": record " + std::to_string(record) + " has dimension " +
                        std::to_string(d) + ", expected " + std::to_string(out.front().size()));
    }
    Vector v(static_cast<std::size_t>(d));
    binio::read_floats(in, v, path + " record " + std::to_string(record));
    out.push_back(std::move(v));
    ++record;
  }
  return out;
}

void save_fvecs(const std::string& path, const std::vector<Vector>& vectors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  for (const auto& v : vectors) {
    if (v.empty() || v.size() != vectors.front().size()) {
      throw InvalidInput("save_fvecs: vectors must share one positive dimension");
    }
    binio::write(out, static_cast<std::int32_t>(v.size()));
    binio::write_floats(out, v);
  }
  if (!out) throw FormatError("write failed: " + path);
}

std::vector<VectorSet> group_sets(const std::vector<Vector>& vectors, std::size_t n,
                                  SetId first_id) {
  if (n == 0) throw InvalidInput("group_sets: set size must be positive");
  std::vector<VectorSet> out;
  out.reserve(vectors.size() / n);
  for (std::size_t s = 0; (s + 1) * n <= vectors.size(); ++s) {
    VectorSet set{first_id + s, {}};
    set.members.assign(vectors.begin() + static_cast<std::ptrdiff_t>(s * n),
                       vectors.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<ManifestEntry> read_set_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<SetId>();
      e.rows = j.at("rows").get<std::vector<std::size_t>>();
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

void write_set_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  for (const auto& e : entries) out << json{{"id", e.id}, {"rows", e.rows}}.dump() << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

std::vector<VectorSet> sets_from_manifest(const std::vector<Vector>& vectors,
                                          const std::vector<ManifestEntry>& entries) {
  std::vector<VectorSet> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    VectorSet s{e.id, {}};
    for (auto r : e.rows) {
      if (r >= vectors.size()) {
        throw FormatError("set " + std::to_string(e.id) + " references row " + std::to_string(r) +
                          " beyond " + std::to_string(vectors.size()) + " vectors");
      }
      s.members.push_back(vectors[r]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_sets(const std::string& fvecs_path, const std::string& manifest_path,
               const std::vector<VectorSet>& sets) {
  std::vector<Vector> rows;
  std::vector<ManifestEntry> entries;
  for (const auto& s : sets) {
    ManifestEntry e{s.id, {}};
    for (const auto& m : s.members) {
      e.rows.push_back(rows.size());
      rows.push_back(m);
    }
    entries.push_back(std::move(e));
  }
  save_fvecs(fvecs_path, rows);
  write_set_manifest(manifest_path, entries);
}

std::vector<VectorSet> load_sets(const std::string& fvecs_path, const std::string& manifest_path) {
  return sets_from_manifest(load_fvecs(fvecs_path), read_set_manifest(manifest_path));
}

void write_ground_truth(const std::string& path, const std::vector<TruthRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  for (const auto& r : records) {
    json hits = json::array();
    for (const auto& h : r.hits) hits.push_back(json::array({h.set_id, h.score}));
    out << json{{"query", r.query}, {"hits", hits}}.dump() << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
}

std::vector<TruthRecord> read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<TruthRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      TruthRecord r;
      r.query = j.at("query").get<std::size_t>();
      for (const auto& h : j.at("hits")) {
        r.hits.push_back({h.at(0).get<SetId>(), h.at(1).get<double>()});
      }
      out.push_back(std::move(r));
    } catch (const json::exception& ex) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

namespace {

std::vector<Vector> topic_centers(const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<Vector> centers(spec.topics, Vector(spec.dim));
  for (auto& c : centers) {
    for (auto& x : c) x = g(rng);
  }
  return centers;
}

std::vector<Vector> draw_runs(const SyntheticSpec& spec, const std::vector<Vector>& centers,
                              std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<float> g(0.0f, static_cast<float>(spec.noise));
  std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
  std::vector<Vector> out;
  out.reserve(count);
  std::size_t topic = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % spec.run_length == 0) topic = pick(rng);
    Vector v = centers[topic];
    for (auto& x : v) x += g(rng);
    out.push_back(std::move(v));
  }
  return out;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.dim == 0 || spec.topics == 0 || spec.run_length == 0 || !(spec.noise >= 0.0)) {
    throw InvalidInput("synthetic: dim, topics and run_length must be positive, noise >= 0");
  }
}

}  // namespace

std::vector<Vector> synthetic_vectors(const SyntheticSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);
  auto centers = topic_centers(spec, rng);
  return draw_runs(spec, centers, spec.count, rng);
}

SyntheticSplit synthetic_split(const SyntheticSpec& spec, std::size_t query_count) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);
  auto centers = topic_centers(spec, rng);
  SyntheticSplit out;
  out.base = draw_runs(spec, centers, spec.count, rng);
  out.queries = draw_runs(spec, centers, query_count, rng);
  return out;
}

}  // namespace vecset
