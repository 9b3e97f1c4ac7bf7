#include "vecset/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "vecset/engine.hpp"
#include "vecset/errors.hpp"
#include "vecset/oracle.hpp"

namespace vecset {

bool VerifyReport::all_passed() const {
  for (const auto& p : properties) {
    if (!p.passed()) return false;
  }
  return true;
}

VectorSet random_set(SetId id, std::size_t card, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  VectorSet s{id, {}};
  while (s.members.size() < card) {
    Vector v(dim);
    for (auto& x : v) x = g(rng);
    if (norm(v) > 1e-3) s.members.push_back(std::move(v));
  }
  return s;
}

SimParams random_params(std::size_t dim, std::size_t max_card, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(0.0, 2.0);
  SimParams p;
  p.dim = dim;
  p.max_card = max_card;
  // every tenth draw puts all weight on one side
  switch (rng() % 10) {
    case 0:
      p.w_max = w(rng) + 0.1;
      p.w_avg = 0.0;
      break;
    case 1:
      p.w_max = 0.0;
      p.w_avg = w(rng) + 0.1;
      break;
    default:
      p.w_max = w(rng) + 1e-3;
      p.w_avg = w(rng) + 1e-3;
  }
  return p;
}

namespace {

class Tracker {
 public:
  explicit Tracker(std::string name) { out_.name = std::move(name); }

  void check(bool ok, std::uint64_t seed, const std::string& what) {
    ++out_.checks;
    if (ok) return;
    if (out_.violations++ == 0) {
      out_.counterexample_seed = seed;
      out_.detail = what;
    }
  }

  PropertyOutcome result() const { return out_; }

 private:
  PropertyOutcome out_;
};

std::string describe(double got, double want) {
  std::ostringstream ss;
  ss.precision(10);
  ss << "got " << got << ", expected " << want;
  return ss.str();
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{seed, trial};
  std::uint64_t out;
  std::uint32_t parts[2];
  seq.generate(parts, parts + 2);
  out = (static_cast<std::uint64_t>(parts[0]) << 32) | parts[1];
  return out;
}

}  // namespace

VerifyReport run_verification(const VerifyConfig& config, const TargetEncoder& encoder) {
  if (config.trials == 0) throw InvalidInput("verify: trials must be positive");
  if (config.max_card == 0 || config.dims.empty()) throw InvalidInput("verify: empty configuration");

  Tracker average("average_identity");
  Tracker target("target_identity");
  Tracker upper("score_upper_bound");
  Tracker attained("score_attained");

  for (std::size_t t = 0; t < config.trials; ++t) {
    const std::uint64_t seed = mix(config.seed, t);
    std::mt19937_64 rng(seed);
    const std::size_t dim = config.dims[rng() % config.dims.size()];
    const std::size_t a_card = 1 + rng() % config.max_card;
    const std::size_t v_card = 1 + rng() % config.max_card;
    const SimParams p = random_params(dim, config.max_card, rng());
    const VectorSet a = random_set(1, a_card, dim, rng());
    const VectorSet v = random_set(2, v_card, dim, rng());

    const auto ps = pairwise_sims(a, v);
    const double sim = set_similarity(a, v, p);
    const LongVector cand = encode_candidate(v, a_card, p);

    const double base_dot = dot(encode_target_base(a, v_card, p), cand);
    average.check(std::abs(base_dot - ps.sum()) <= 1e-4 * std::max(1.0, std::abs(ps.sum())), seed,
                  describe(base_dot, ps.sum()));

    const double best = ps.max();
    for (const auto& tv : encoder(a, v_card, p)) {
      const double score = dot(tv.vec, cand);
      const double c = ps.at(tv.i, tv.j);
      const double want = (p.w_max * c + p.w_avg * ps.avg()) / (p.w_max + p.w_avg);
      target.check(std::abs(score - want) <= config.tol, seed, describe(score, want));
      upper.check(sim >= score - config.tol, seed, describe(score, sim) + " (score above similarity)");
      if (c == best) {
        attained.check(std::abs(sim - score) <= config.tol, seed, describe(score, sim));
      }
    }
  }

  Tracker top1("top1_exact");
  Tracker topu("topu_exact");
  const std::size_t db_trials = std::max<std::size_t>(1, config.trials / 200);
  for (std::size_t t = 0; t < db_trials; ++t) {
    const std::uint64_t seed = mix(config.seed ^ 0x5eedULL, t);
    std::mt19937_64 rng(seed);
    const std::size_t dim = config.dims[rng() % config.dims.size()];
    SimParams p = random_params(dim, config.max_card, rng());
    std::vector<VectorSet> db;
    for (std::size_t s = 0; s < config.db_sets; ++s) {
      db.push_back(random_set(s, 1 + rng() % config.max_card, dim, rng()));
    }
    EngineConfig ec;
    ec.params = p;
    for (std::size_t n = 1; n <= config.max_card; ++n) ec.target_cards.push_back(n);
    SetSearchEngine engine(ec);
    engine.ingest(db);
    engine.seal();
    OracleIndex oracle(db, p);

    for (std::size_t q = 0; q < config.db_queries; ++q) {
      const VectorSet a = random_set(1000000 + q, 1 + rng() % config.max_card, dim, rng());
      const std::size_t u = std::min<std::size_t>(10, db.size());
      const auto truth = oracle.top_u(a, u);

      QueryOptions one;
      one.u = 1;
      one.per_target_r = 1;
      one.rescore = false;
      const auto got = engine.query_top_u(a, one);
      const double got_sim = set_similarity(a, *std::find_if(db.begin(), db.end(), [&](const auto& s) {
        return s.id == got.hits.front().set_id;
      }), p);
      top1.check(std::abs(got_sim - truth.front().score) <= config.tol, seed,
                 describe(got_sim, truth.front().score));

      QueryOptions many;
      many.u = u;
      many.per_target_r = 10;
      many.rescore = true;
      const auto list = engine.query_top_u(a, many);
      bool same = list.hits.size() == truth.size();
      for (std::size_t r = 0; same && r < truth.size(); ++r) {
        same = list.hits[r].set_id == truth[r].set_id &&
               std::abs(list.hits[r].score - truth[r].score) <= config.tol;
      }
      topu.check(same, seed, "top-" + std::to_string(u) + " list differs from oracle");
    }
  }

  VerifyReport report;
  for (const auto* tr : {&average, &target, &upper, &attained, &top1, &topu}) {
    report.properties.push_back(tr->result());
  }
  return report;
}

TargetEncoder corrupted_target_encoder() {
  return [](const VectorSet& a, std::size_t k, const SimParams& p) {
    auto targets = encode_targets(a, k, p);
    const std::size_t a_card = a.cardinality();
    if (a_card * k < 2) {
      // a single block cannot be misplaced; scale it instead
      for (auto& t : targets) {
        for (auto& x : t.vec.data()) x *= 1.5f;
      }
      return targets;
    }
    // each pair receives the next pair's vector, so the selected block is misaligned
    std::vector<LongVector> shifted;
    for (std::size_t t = 0; t < targets.size(); ++t) shifted.push_back(targets[(t + 1) % targets.size()].vec);
    for (std::size_t t = 0; t < targets.size(); ++t) targets[t].vec = std::move(shifted[t]);
    return targets;
  };
}

}  // namespace vecset
