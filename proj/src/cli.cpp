#include "vecset/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vecset/bench.hpp"
#include "vecset/dataset.hpp"
#include "vecset/engine.hpp"
#include "vecset/errors.hpp"
#include "vecset/verify.hpp"

namespace vecset::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SetSource {
  std::string path;
  std::string manifest;
  std::size_t set_size = 3;
  std::size_t limit = 0;  // vectors to read, 0 = all
};

struct CliConfig {
  SetSource data;
  SetSource queries;
  std::string out;
  std::string index_dir;
  std::string truth;

  double w_max = 1.0;
  double w_avg = 1.0;
  std::size_t max_card = 0;  // 0: largest cardinality in the data
  std::vector<std::size_t> target_cards;

  std::string backend = "flat";
  std::size_t leaves = 0;
  std::size_t probes = 1;
  std::size_t kmeans_iters = 20;
  std::uint64_t seed = 42;
  std::size_t workers = 1;

  std::size_t u = 10;
  std::size_t per_target_r = 0;
  std::string rescore = "auto";

  std::vector<std::size_t> ks{1, 10};
  std::vector<std::size_t> probes_sweep{1, 2, 4, 8, 16};
  double min_recall = -1.0;
  bool oracle_latency = false;

  std::size_t trials = 1000;
  bool inject_fault = false;

  std::size_t synth_count = 99999;
  std::size_t synth_queries = 900;
  std::size_t synth_dim = 100;
  std::size_t synth_topics = 2000;
  double synth_noise = 1.0;
};

std::string data_root() {
  const char* env = std::getenv("VECSET_DATA_DIR");
  return env ? std::string(env) : std::string(".");
}

void default_path(std::string& path, const char* file) {
  if (path.empty()) path = (fs::path(data_root()) / file).string();
}

std::vector<VectorSet> load_source(const SetSource& src) {
  auto vectors = load_fvecs(src.path);
  if (src.limit != 0 && vectors.size() > src.limit) vectors.resize(src.limit);
  if (!src.manifest.empty()) return sets_from_manifest(vectors, read_set_manifest(src.manifest));
  return group_sets(vectors, src.set_size);
}

std::optional<bool> rescore_flag(const std::string& s) {
  if (s == "auto") return std::nullopt;
  return s == "on";
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

void check_common(const CliConfig& c) {
  require(c.w_max >= 0.0 && c.w_avg >= 0.0 && c.w_max + c.w_avg > 0.0,
          "--w-max and --w-avg must be nonnegative with a positive sum");
  require(c.workers >= 1, "--workers must be >= 1");
}

QueryOptions query_options(const CliConfig& c) {
  QueryOptions o;
  o.u = c.u;
  o.probes = c.probes;
  o.per_target_r = c.per_target_r;
  o.rescore = rescore_flag(c.rescore);
  return o;
}

json hits_json(const std::vector<SearchHit>& hits) {
  json arr = json::array();
  for (const auto& h : hits) arr.push_back(json::array({h.set_id, h.score}));
  return arr;
}

int cmd_build(const CliConfig& c, std::ostream& out, std::ostream& err) {
  check_common(c);
  require(!c.out.empty(), "build: --out is required");
  SetSource data = c.data;
  default_path(data.path, "base.fvecs");

  auto sets = load_source(data);
  if (sets.empty()) throw InvalidInput("build: dataset yields no sets");
  std::size_t largest = 0;
  for (const auto& s : sets) largest = std::max(largest, s.cardinality());

  EngineConfig ec;
  ec.params.w_max = c.w_max;
  ec.params.w_avg = c.w_avg;
  ec.params.dim = sets.front().members.empty() ? 0 : sets.front().members.front().size();
  ec.params.max_card = c.max_card;
  if (ec.params.max_card == 0) {
    ec.params.max_card = largest;
    for (auto n : c.target_cards) ec.params.max_card = std::max(ec.params.max_card, n);
  }
  ec.backend = parse_backend(c.backend);
  ec.ivf.leaves = c.leaves;
  ec.ivf.probes = c.probes;
  ec.ivf.kmeans_iters = c.kmeans_iters;
  ec.ivf.seed = c.seed;
  ec.target_cards = c.target_cards;
  ec.build_workers = c.workers;

  SetSearchEngine engine(ec);
  engine.ingest(std::move(sets));
  engine.seal();
  engine.save(c.out);

  out << "engine: " << engine.catalog().size() << " sets, dim " << ec.params.dim << ", backend "
      << backend_name(ec.backend) << "\n";
  for (auto key : engine.grid_keys()) {
    const auto& idx = engine.index(key);
    out << "grid (" << key.n << "," << key.k << "): " << idx.size() << " entries";
    if (idx.backend() == Backend::ivf) out << ", " << idx.leaves() << " leaves";
    out << "\n";
  }
  err << "wrote " << c.out << "\n";
  return kOk;
}

int cmd_query(const CliConfig& c, std::ostream& out, std::ostream& err) {
  check_common(c);
  require(!c.index_dir.empty(), "query: --index is required");
  require(c.u >= 1, "query: -u must be >= 1");
  SetSource src = c.queries;
  default_path(src.path, "query.fvecs");

  auto engine = SetSearchEngine::load(c.index_dir);
  auto queries = load_source(src);
  auto opts = query_options(c);

  int code = kOk;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    try {
      auto report = engine.query_top_u(queries[q], opts);
      out << json{{"query", q}, {"hits", hits_json(report.hits)}}.dump() << '\n';
    } catch (const Error& e) {
      if (dynamic_cast<const FormatError*>(&e) != nullptr) throw;
      out << json{{"query", q}, {"error", e.what()}}.dump() << '\n';
      err << "query " << q << ": " << e.what() << "\n";
      code = kFailure;
    }
  }
  return code;
}

int cmd_oracle(const CliConfig& c, std::ostream& out, std::ostream& err) {
  check_common(c);
  require(c.u >= 1, "oracle: -u must be >= 1");
  SetSource src = c.queries;
  default_path(src.path, "query.fvecs");

  std::vector<VectorSet> db;
  SimParams p;
  if (!c.index_dir.empty()) {
    auto engine = SetSearchEngine::load(c.index_dir);
    db.assign(engine.catalog().begin(), engine.catalog().end());
    p = engine.params();
  } else {
    SetSource data = c.data;
    default_path(data.path, "base.fvecs");
    db = load_source(data);
    if (db.empty()) throw InvalidInput("oracle: dataset yields no sets");
    p.w_max = c.w_max;
    p.w_avg = c.w_avg;
    p.dim = db.front().members.front().size();
    for (const auto& s : db) p.max_card = std::max(p.max_card, s.cardinality());
  }
  auto queries = load_source(src);
  for (const auto& q : queries) p.max_card = std::max(p.max_card, q.cardinality());
  OracleIndex oracle(db, p);
  auto results = oracle.top_u_batch(queries, c.u, c.workers);

  std::vector<TruthRecord> records;
  for (std::size_t q = 0; q < results.size(); ++q) records.push_back({q, std::move(results[q])});
  if (c.out.empty()) {
    for (const auto& r : records) out << json{{"query", r.query}, {"hits", hits_json(r.hits)}}.dump() << '\n';
  } else {
    write_ground_truth(c.out, records);
    err << "wrote " << records.size() << " ground-truth records to " << c.out << "\n";
  }
  return kOk;
}

int cmd_bench(const CliConfig& c, std::ostream& out, std::ostream& err) {
  check_common(c);
  require(!c.index_dir.empty(), "bench: --index is required");
  require(!c.ks.empty() && std::all_of(c.ks.begin(), c.ks.end(), [](auto k) { return k >= 1; }),
          "bench: --ks must list positive values");
  require(!c.probes_sweep.empty() &&
              std::all_of(c.probes_sweep.begin(), c.probes_sweep.end(), [](auto p) { return p >= 1; }),
          "bench: --probes-sweep must list positive values");
  SetSource src = c.queries;
  default_path(src.path, "query.fvecs");

  auto engine = SetSearchEngine::load(c.index_dir);
  auto queries = load_source(src);
  const std::size_t kmax = *std::max_element(c.ks.begin(), c.ks.end());

  std::vector<std::vector<SearchHit>> truth;
  OracleIndex oracle(engine.catalog(), engine.params());
  if (!c.truth.empty()) {
    auto records = read_ground_truth(c.truth);
    truth.resize(queries.size());
    for (auto& r : records) {
      if (r.query >= queries.size()) throw FormatError(c.truth + ": query index out of range");
      truth[r.query] = std::move(r.hits);
    }
  } else {
    truth = oracle.top_u_batch(queries, kmax, c.workers);
  }

  BenchConfig bc;
  bc.ks = c.ks;
  bc.probes = c.probes_sweep;
  bc.workers = c.workers;
  bc.per_target_r = c.per_target_r;
  bc.rescore = rescore_flag(c.rescore);
  auto result = run_benchmark(engine, truth, queries, bc);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  if (c.oracle_latency) {
    auto lat = oracle_latency(oracle, queries, kmax);
    err << "oracle latency: mean " << lat.mean_ms << " ms, p95 " << lat.p95_ms << " ms\n";
  }

  if (c.out.empty()) {
    write_bench_csv(out, result);
  } else {
    std::ofstream f(c.out, std::ios::trunc);
    if (!f) throw FormatError("cannot open " + c.out + " for writing");
    write_bench_csv(f, result);
  }

  if (c.min_recall >= 0.0) {
    double best = 0.0;
    for (const auto& r : result.rows) {
      if (r.k == kmax) best = std::max(best, r.recall_mean);
    }
    if (best < c.min_recall) {
      err << "best recall@" << kmax << " " << best << " below --min-recall " << c.min_recall << "\n";
      return kFailure;
    }
  }
  return kOk;
}

int cmd_verify(const CliConfig& c, std::ostream& out, std::ostream&) {
  require(c.trials >= 1, "verify: --trials must be >= 1");
  require(c.max_card >= 1 || c.max_card == 0, "verify: bad --max-card");
  VerifyConfig vc;
  vc.trials = c.trials;
  vc.seed = c.seed;
  vc.max_card = c.max_card == 0 ? 4 : c.max_card;
  auto report = c.inject_fault ? run_verification(vc, corrupted_target_encoder()) : run_verification(vc);
  for (const auto& p : report.properties) {
    out << (p.passed() ? "PASS " : "FAIL ") << p.name << " (" << p.checks << " checks";
    if (!p.passed()) {
      out << ", " << p.violations << " violations, counterexample seed " << p.counterexample_seed
          << ": " << p.detail;
    }
    out << ")\n";
  }
  return report.all_passed() ? kOk : kFailure;
}

int cmd_synth(const CliConfig& c, std::ostream& out, std::ostream&) {
  require(!c.out.empty(), "synth: --out is required");
  require(c.synth_count >= 1 && c.synth_dim >= 1 && c.synth_topics >= 1 && c.synth_noise >= 0.0,
          "synth: --count, --dim, --topics must be positive and --noise nonnegative");
  SyntheticSpec spec;
  spec.count = c.synth_count;
  spec.dim = c.synth_dim;
  spec.topics = c.synth_topics;
  spec.noise = c.synth_noise;
  spec.run_length = c.data.set_size;
  spec.seed = c.seed;
  auto split = synthetic_split(spec, c.synth_queries);
  fs::create_directories(c.out);
  save_fvecs((fs::path(c.out) / "base.fvecs").string(), split.base);
  save_fvecs((fs::path(c.out) / "query.fvecs").string(), split.queries);
  out << "wrote " << split.base.size() << " base and " << split.queries.size()
      << " query vectors to " << c.out << "\n";
  return kOk;
}

void add_params(CLI::App* sub, CliConfig& c) {
  sub->add_option("--w-max", c.w_max, "Weight of the best-pair similarity")->capture_default_str();
  sub->add_option("--w-avg", c.w_avg, "Weight of the average pairwise similarity")->capture_default_str();
}

void add_source(CLI::App* sub, SetSource& s, const std::string& prefix, const std::string& what) {
  sub->add_option("--" + prefix, s.path, what + " vectors (fvecs)");
  sub->add_option("--" + prefix + "-manifest", s.manifest, what + " sets manifest (jsonl)");
  sub->add_option("--" + prefix + "-set-size", s.set_size, "Consecutive grouping size when no manifest is given")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--" + prefix + "-limit", s.limit, "Read at most this many vectors (0 = all)");
}

void add_query_flags(CLI::App* sub, CliConfig& c) {
  sub->add_option("-u,--k", c.u, "Number of sets to return")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--probes", c.probes, "Posting lists scanned per target (ivf)")->check(CLI::PositiveNumber);
  sub->add_option("--per-target-r", c.per_target_r, "Hits retrieved per long target (0 = max(u, 10))");
  sub->add_option("--rescore", c.rescore, "Rescore pooled candidates exactly: on, off or auto")
      ->check(CLI::IsMember({"on", "off", "auto"}))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"Set-to-set similarity search over long-vector encodings", "vecset"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* build = app.add_subcommand("build", "Encode a dataset and persist the search grid");
  add_source(build, c.data, "data", "Dataset");
  add_params(build, c);
  build->add_option("-o,--out", c.out, "Output directory");
  build->add_option("--max-card", c.max_card, "Maximum set cardinality (0 = largest present)");
  build->add_option("--target-cards", c.target_cards, "Query cardinalities to materialize")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  build->add_option("--backend", c.backend, "flat or ivf")->check(CLI::IsMember({"flat", "ivf"}))->capture_default_str();
  build->add_option("--leaves", c.leaves, "IVF leaves per index (default round(sqrt(size)))")->check(CLI::PositiveNumber);
  build->add_option("--probes", c.probes, "Default probes stored with the engine")->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--kmeans-iters", c.kmeans_iters, "Lloyd iterations")->check(CLI::PositiveNumber)->capture_default_str();
  build->add_option("--seed", c.seed, "k-means seed")->capture_default_str();
  build->add_option("--workers", c.workers, "Build threads")->check(CLI::PositiveNumber);

  auto* query = app.add_subcommand("query", "Search a persisted engine; one JSON line per query");
  query->add_option("--index", c.index_dir, "Engine directory");
  add_source(query, c.queries, "queries", "Query");
  add_query_flags(query, c);

  auto* oracle = app.add_subcommand("oracle", "Exact brute-force top-u (ground truth)");
  oracle->add_option("--index", c.index_dir, "Use the catalog of a persisted engine as database");
  add_source(oracle, c.data, "data", "Dataset");
  add_source(oracle, c.queries, "queries", "Query");
  add_params(oracle, c);
  oracle->add_option("-u,--k", c.u, "Number of sets to return")->capture_default_str()->check(CLI::PositiveNumber);
  oracle->add_option("-o,--out", c.out, "Ground-truth file (default: stdout)");
  oracle->add_option("--workers", c.workers, "Threads")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "Recall/latency sweep against exact ground truth");
  bench->add_option("--index", c.index_dir, "Engine directory");
  add_source(bench, c.queries, "queries", "Query");
  bench->add_option("--truth", c.truth, "Ground-truth file (default: computed with the oracle)");
  bench->add_option("--ks", c.ks, "k values")->delimiter(',')->capture_default_str();
  bench->add_option("--probes-sweep", c.probes_sweep, "probes values")->delimiter(',')->capture_default_str();
  bench->add_option("--per-target-r", c.per_target_r, "Hits retrieved per long target (0 = max(k, 10))");
  bench->add_option("--rescore", c.rescore, "on, off or auto")->check(CLI::IsMember({"on", "off", "auto"}));
  bench->add_option("--workers", c.workers, "1 = sequential single-thread timing; more = batched")
      ->check(CLI::PositiveNumber);
  bench->add_option("-o,--out", c.out, "CSV output (default: stdout)");
  bench->add_option("--min-recall", c.min_recall, "Fail unless the best recall at the largest k reaches this");
  bench->add_flag("--oracle-latency", c.oracle_latency, "Also time the brute-force oracle");

  auto* verify = app.add_subcommand("verify", "Check the encoding identities and search guarantees on random data");
  verify->add_option("--trials", c.trials, "Random (A, V, weights) triples")->capture_default_str();
  verify->add_option("--seed", c.seed, "Seed")->capture_default_str();
  verify->add_option("--max-card", c.max_card, "Maximum set cardinality (default 4)");
  verify->add_flag("--inject-fault", c.inject_fault, "Use a deliberately broken target encoder")->group("");

  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic base/query fvecs pair");
  synth->add_option("-o,--out", c.out, "Output directory");
  synth->add_option("--count", c.synth_count, "Base vectors")->capture_default_str();
  synth->add_option("--queries", c.synth_queries, "Query vectors")->capture_default_str();
  synth->add_option("--dim", c.synth_dim, "Dimension")->capture_default_str();
  synth->add_option("--topics", c.synth_topics, "Topic centers")->capture_default_str();
  synth->add_option("--noise", c.synth_noise, "Per-coordinate noise scale")->capture_default_str();
  synth->add_option("--set-size", c.data.set_size, "Vectors per topic run")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", c.seed, "Seed")->capture_default_str();

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (build->parsed()) return cmd_build(c, out, err);
    if (query->parsed()) return cmd_query(c, out, err);
    if (oracle->parsed()) return cmd_oracle(c, out, err);
    if (bench->parsed()) return cmd_bench(c, out, err);
    if (verify->parsed()) return cmd_verify(c, out, err);
    if (synth->parsed()) return cmd_synth(c, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace vecset::cli
