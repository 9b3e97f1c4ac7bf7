#include "vecset/engine.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "vecset/dataset.hpp"
#include "vecset/encoder.hpp"
#include "vecset/errors.hpp"

namespace vecset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "vecset-engine-1";

std::string index_file_name(GridKey key) {
  return "index_n" + std::to_string(key.n) + "_k" + std::to_string(key.k) + ".vslv";
}

}  // namespace

SetSearchEngine::SetSearchEngine(EngineConfig config) : config_(std::move(config)) {
  config_.params.validate();
  config_.ivf.validate();
  for (auto n : config_.target_cards) {
    if (n < 1 || n > config_.params.max_card) {
      throw InvalidInput("target cardinality " + std::to_string(n) + " outside [1, " +
                         std::to_string(config_.params.max_card) + "]");
    }
  }
}

IngestSummary SetSearchEngine::ingest(std::vector<VectorSet> sets) {
  if (sealed_) throw StateError("ingest after seal");
  if (sets.empty()) throw InvalidInput("ingest: empty collection");
  std::unordered_map<SetId, std::size_t> batch_ids;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    validate_set(sets[s], config_.params);
    if (slot_of_.contains(sets[s].id) || !batch_ids.emplace(sets[s].id, s).second) {
      throw Conflict("duplicate set id " + std::to_string(sets[s].id));
    }
  }
  IngestSummary summary;
  summary.sets = sets.size();
  for (auto& s : sets) {
    ++summary.by_cardinality[s.cardinality()];
    candidate_cards_.insert(s.cardinality());
    slot_of_.emplace(s.id, sets_.size());
    sets_.push_back(std::move(s));
  }
  return summary;
}

void SetSearchEngine::seal() {
  if (sealed_) throw StateError("engine already sealed");
  if (sets_.empty()) throw InvalidInput("seal: no sets ingested");
  if (config_.target_cards.empty()) {
    target_cards_ = candidate_cards_;
  } else {
    target_cards_.insert(config_.target_cards.begin(), config_.target_cards.end());
  }

  std::map<std::size_t, std::vector<std::size_t>> slots_by_card;
  for (std::size_t s = 0; s < sets_.size(); ++s) slots_by_card[sets_[s].cardinality()].push_back(s);

  for (auto n : target_cards_) {
    for (const auto& [k, slots] : slots_by_card) {
      std::vector<MipsEntry> entries;
      entries.reserve(slots.size());
      for (auto s : slots) entries.push_back({sets_[s].id, encode_candidate(sets_[s], n, config_.params)});
      MipsIndex idx = [&] {
        if (config_.backend == Backend::flat) return MipsIndex::build_flat(std::move(entries));
        IvfParams ivf = config_.ivf;
        std::size_t leaves = ivf.leaves == 0 ? default_leaves(entries.size()) : ivf.leaves;
        ivf.leaves = std::min(leaves, entries.size());
        ivf.probes = std::min(ivf.probes, ivf.leaves);
        return MipsIndex::build_ivf(std::move(entries), ivf, config_.build_workers);
      }();
      grid_.emplace(GridKey{n, k}, std::move(idx));
    }
  }
  finish_seal();
}

void SetSearchEngine::finish_seal() {
  exact_ = std::make_unique<OracleIndex>(sets_, config_.params);
  sealed_ = true;
}

std::vector<GridKey> SetSearchEngine::grid_keys() const {
  std::vector<GridKey> keys;
  for (const auto& [key, idx] : grid_) keys.push_back(key);
  return keys;
}

const MipsIndex& SetSearchEngine::index(GridKey key) const {
  auto it = grid_.find(key);
  if (it == grid_.end()) {
    throw InvalidInput("no index for (" + std::to_string(key.n) + ", " + std::to_string(key.k) + ")");
  }
  return it->second;
}

std::size_t SetSearchEngine::targets_for(std::size_t a_card) const {
  std::size_t total = 0;
  for (auto k : candidate_cards_) total += a_card * k;
  return total;
}

QueryReport SetSearchEngine::query_top_u(const VectorSet& a, const QueryOptions& opts) const {
  if (!sealed_) throw StateError("query before seal");
  if (opts.u == 0) throw InvalidInput("u must be positive");
  const auto start = std::chrono::steady_clock::now();

  const std::size_t a_card = a.cardinality();
  if (!target_cards_.contains(a_card)) {
    std::string have;
    for (auto n : target_cards_) have += (have.empty() ? "" : ",") + std::to_string(n);
    throw UnsupportedCardinality("query cardinality " + std::to_string(a_card) +
                                 " was not materialized (available: " + have + ")");
  }
  validate_set(a, config_.params);
  const std::size_t per_target_r =
      opts.per_target_r == 0 ? std::max<std::size_t>(opts.u, 10) : opts.per_target_r;
  const std::size_t probes = opts.probes == 0 ? config_.ivf.probes : opts.probes;
  const bool rescore = opts.rescore.value_or(config_.backend == Backend::ivf);

  QueryReport report;
  std::unordered_map<SetId, double> pool;
  for (auto k : candidate_cards_) {
    const MipsIndex& idx = grid_.at(GridKey{a_card, k});
    std::vector<LongVector> queries;
    for (auto& t : encode_targets(a, k, config_.params)) queries.push_back(std::move(t.vec));
    report.targets_issued += queries.size();
    if (idx.backend() == Backend::ivf) {
      report.probes_used = std::max(report.probes_used, std::min(probes, idx.leaves()));
    }
    for (const auto& hits : idx.search_batch(queries, per_target_r, probes)) {
      for (const auto& h : hits) {
        auto [it, fresh] = pool.emplace(h.set_id, h.score);
        if (!fresh) it->second = std::max(it->second, h.score);
      }
    }
  }

  std::vector<SearchHit> hits;
  hits.reserve(pool.size());
  if (rescore) {
    auto q = normalize_query(a, config_.params);
    for (const auto& [id, score] : pool) hits.push_back({id, exact_->similarity(q, slot_of_.at(id))});
  } else {
    for (const auto& [id, score] : pool) hits.push_back({id, score});
  }
  report.candidates_scored = hits.size();
  report.hits = top_hits(std::move(hits), opts.u);
  report.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<QueryReport> SetSearchEngine::query_batch(std::span<const VectorSet> queries,
                                                      const QueryOptions& opts,
                                                      std::size_t workers) const {
  std::vector<QueryReport> out(queries.size());
  workers = std::max<std::size_t>(1, std::min(workers, queries.size()));
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::size_t w) {
    try {
      for (std::size_t q = w; q < queries.size(); q += workers) out[q] = query_top_u(queries[q], opts);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void SetSearchEngine::save(const std::string& dir) const {
  if (!sealed_) throw StateError("save before seal");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir + ": " + ec.message());

  json indexes = json::array();
  for (const auto& [key, idx] : grid_) {
    std::string name = index_file_name(key);
    idx.save((fs::path(dir) / name).string());
    indexes.push_back({{"n", key.n}, {"k", key.k}, {"file", name}, {"size", idx.size()},
                       {"leaves", idx.leaves()}});
  }
  save_sets((fs::path(dir) / "catalog.fvecs").string(), (fs::path(dir) / "catalog.jsonl").string(),
            sets_);

  const auto& p = config_.params;
  json manifest = {
      {"format", kManifestFormat},
      {"params", {{"w_max", p.w_max}, {"w_avg", p.w_avg}, {"dim", p.dim}, {"max_card", p.max_card}}},
      {"backend", backend_name(config_.backend)},
      {"ivf",
       {{"leaves", config_.ivf.leaves},
        {"probes", config_.ivf.probes},
        {"kmeans_iters", config_.ivf.kmeans_iters},
        {"seed", config_.ivf.seed}}},
      {"target_cards", std::vector<std::size_t>(target_cards_.begin(), target_cards_.end())},
      {"candidate_cards", std::vector<std::size_t>(candidate_cards_.begin(), candidate_cards_.end())},
      {"indexes", indexes},
      {"catalog", {{"vectors", "catalog.fvecs"}, {"sets", "catalog.jsonl"}}},
  };
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw FormatError("write failed: " + dir + "/manifest.json");
}

SetSearchEngine SetSearchEngine::load(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw FormatError("cannot open " + dir + "/manifest.json");
  try {
    json m = json::parse(in);
    if (m.at("format").get<std::string>() != kManifestFormat) {
      throw FormatError(dir + ": unsupported manifest format");
    }
    EngineConfig cfg;
    const auto& p = m.at("params");
    cfg.params.w_max = p.at("w_max").get<double>();
    cfg.params.w_avg = p.at("w_avg").get<double>();
    cfg.params.dim = p.at("dim").get<std::size_t>();
    cfg.params.max_card = p.at("max_card").get<std::size_t>();
    cfg.backend = parse_backend(m.at("backend").get<std::string>());
    const auto& ivf = m.at("ivf");
    cfg.ivf.leaves = ivf.at("leaves").get<std::size_t>();
    cfg.ivf.probes = ivf.at("probes").get<std::size_t>();
    cfg.ivf.kmeans_iters = ivf.at("kmeans_iters").get<std::size_t>();
    cfg.ivf.seed = ivf.at("seed").get<std::uint64_t>();
    cfg.target_cards = m.at("target_cards").get<std::vector<std::size_t>>();

    SetSearchEngine engine(cfg);
    const auto& cat = m.at("catalog");
    engine.ingest(load_sets((fs::path(dir) / cat.at("vectors").get<std::string>()).string(),
                            (fs::path(dir) / cat.at("sets").get<std::string>()).string()));
    engine.target_cards_.insert(cfg.target_cards.begin(), cfg.target_cards.end());
    for (const auto& e : m.at("indexes")) {
      GridKey key{e.at("n").get<std::size_t>(), e.at("k").get<std::size_t>()};
      auto idx = MipsIndex::load((fs::path(dir) / e.at("file").get<std::string>()).string());
      if (idx.shape().n != key.n || idx.shape().k != key.k || idx.shape().dim != cfg.params.dim) {
        throw FormatError(dir + ": index file shape disagrees with manifest");
      }
      engine.grid_.emplace(key, std::move(idx));
    }
    for (auto n : engine.target_cards_) {
      for (auto k : engine.candidate_cards_) {
        if (!engine.grid_.contains(GridKey{n, k})) {
          throw FormatError(dir + ": manifest is missing index (" + std::to_string(n) + ", " +
                            std::to_string(k) + ")");
        }
      }
    }
    engine.finish_seal();
    return engine;
  } catch (const json::exception& ex) {
    throw FormatError(dir + "/manifest.json: " + ex.what());
  }
}

}  // namespace vecset
