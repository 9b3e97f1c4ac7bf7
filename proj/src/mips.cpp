#include "vecset/mips.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <thread>

#include "binio.hpp"
#include "vecset/errors.hpp"
#include "vecset/kernels.hpp"

namespace vecset {

namespace {

constexpr char kMagic[5] = {'V', 'S', 'L', 'V', '1'};

// Bounded collector of the best hits under ranks_before.
class TopCollector {
 public:
  explicit TopCollector(std::size_t r) : r_(r) {}

  void offer(SetId id, double score) {
    SearchHit h{id, score};
    if (heap_.size() < r_) {
      heap_.push(h);
    } else if (ranks_before(h, heap_.top())) {
      heap_.pop();
      heap_.push(h);
    }
  }

  std::vector<SearchHit> take() {
    std::vector<SearchHit> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t r_;
  // top() is the currently worst-ranked hit
  std::priority_queue<SearchHit, std::vector<SearchHit>, decltype(&ranks_before)> heap_{
      &ranks_before};
};

void run_parallel(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

// Nearest centroid by Euclidean distance, ties to the lowest index.
std::vector<std::uint32_t> assign(std::span<const float> data, std::size_t count,
                                  std::span<const float> centroids, std::size_t leaves,
                                  std::size_t dim, std::size_t workers) {
  std::vector<float> cnorm(leaves);
  for (std::size_t c = 0; c < leaves; ++c) {
    const float* cp = centroids.data() + c * dim;
    cnorm[c] = kernels::dot_f32(cp, cp, dim);
  }
  std::vector<std::uint32_t> out(count);
  run_parallel(count, workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) {
      const float* x = data.data() + e * dim;
      float best = std::numeric_limits<float>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t c = 0; c < leaves; ++c) {
        // ||x - c||^2 minus the constant ||x||^2
        float d = cnorm[c] - 2.0f * kernels::dot_f32(x, centroids.data() + c * dim, dim);
        if (d < best) {
          best = d;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      out[e] = arg;
    }
  });
  return out;
}

std::vector<float> kmeans_pp_init(std::span<const float> data, std::size_t count,
                                  std::size_t leaves, std::size_t dim, std::mt19937_64& rng) {
  std::vector<float> centroids(leaves * dim);
  std::vector<bool> chosen(count, false);
  std::vector<double> d2(count, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
  auto take = [&](std::size_t c, std::size_t e) {
    chosen[e] = true;
    std::copy_n(data.data() + e * dim, dim, centroids.data() + c * dim);
    const float* cp = centroids.data() + c * dim;
    for (std::size_t x = 0; x < count; ++x) {
      d2[x] = std::min(d2[x], static_cast<double>(kernels::squared_l2(data.data() + x * dim, cp, dim)));
    }
  };
  take(0, first);
  for (std::size_t c = 1; c < leaves; ++c) {
    double total = 0.0;
    for (std::size_t x = 0; x < count; ++x) {
      if (!chosen[x]) total += d2[x];
    }
    std::size_t pick = count;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double run = 0.0;
      for (std::size_t x = 0; x < count; ++x) {
        if (chosen[x] || d2[x] <= 0.0) continue;
        run += d2[x];
        pick = x;
        if (run >= target) break;
      }
    }
    if (pick == count) {
      // every remaining point coincides with a chosen centroid
      for (std::size_t x = 0; x < count; ++x) {
        if (!chosen[x]) {
          pick = x;
          break;
        }
      }
    }
    take(c, pick);
  }
  return centroids;
}

LongShape common_shape(const std::vector<MipsEntry>& entries) {
  if (entries.empty()) throw InvalidInput("mips: no entries");
  LongShape shape = entries.front().vec.shape();
  for (const auto& e : entries) {
    if (!(e.vec.shape() == shape)) throw InvalidInput("mips: entries have different shapes");
  }
  return shape;
}

}  // namespace

const char* backend_name(Backend b) { return b == Backend::flat ? "flat" : "ivf"; }

Backend parse_backend(const std::string& s) {
  if (s == "flat") return Backend::flat;
  if (s == "ivf") return Backend::ivf;
  throw InvalidInput("unknown backend '" + s + "' (expected flat or ivf)");
}

void IvfParams::validate() const {
  if (probes == 0) throw InvalidInput("probes must be positive");
  if (kmeans_iters == 0) throw InvalidInput("kmeans_iters must be positive");
  if (leaves != 0 && probes > leaves) throw InvalidInput("probes must not exceed leaves");
}

std::size_t default_leaves(std::size_t entries) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(entries)))));
}

MipsIndex MipsIndex::build_flat(std::vector<MipsEntry> entries) {
  MipsIndex idx;
  idx.shape_ = common_shape(entries);
  idx.backend_ = Backend::flat;
  const std::size_t dim = idx.shape_.size();
  idx.ids_.reserve(entries.size());
  idx.data_.reserve(entries.size() * dim);
  for (const auto& e : entries) {
    idx.ids_.push_back(e.id);
    idx.data_.insert(idx.data_.end(), e.vec.data().begin(), e.vec.data().end());
  }
  return idx;
}

MipsIndex MipsIndex::build_ivf(std::vector<MipsEntry> entries, const IvfParams& params,
                               std::size_t workers) {
  params.validate();
  const LongShape shape = common_shape(entries);
  const std::size_t count = entries.size();
  const std::size_t leaves = params.leaves == 0 ? default_leaves(count) : params.leaves;
  if (leaves > count) {
    throw InvalidInput("ivf: leaves (" + std::to_string(leaves) + ") exceed entries (" +
                       std::to_string(count) + ")");
  }
  const std::size_t dim = shape.size();

  std::vector<float> data;
  data.reserve(count * dim);
  for (const auto& e : entries) data.insert(data.end(), e.vec.data().begin(), e.vec.data().end());

  std::mt19937_64 rng(params.seed);
  std::vector<float> centroids = kmeans_pp_init(data, count, leaves, dim, rng);

  std::vector<double> sums(leaves * dim);
  std::vector<std::size_t> counts(leaves);
  for (std::size_t it = 0; it < params.kmeans_iters; ++it) {
    auto labels = assign(data, count, centroids, leaves, dim, workers);
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t e = 0; e < count; ++e) {
      double* s = sums.data() + labels[e] * dim;
      const float* x = data.data() + e * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += x[d];
      ++counts[labels[e]];
    }
    for (std::size_t c = 0; c < leaves; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d) {
        centroids[c * dim + d] = static_cast<float>(sums[c * dim + d] / static_cast<double>(counts[c]));
      }
    }
  }
  auto labels = assign(data, count, centroids, leaves, dim, workers);

  MipsIndex idx;
  idx.backend_ = Backend::ivf;
  idx.shape_ = shape;
  idx.centroids_ = std::move(centroids);
  idx.list_offsets_.assign(leaves + 1, 0);
  for (auto l : labels) ++idx.list_offsets_[l + 1];
  std::partial_sum(idx.list_offsets_.begin(), idx.list_offsets_.end(), idx.list_offsets_.begin());
  std::vector<std::size_t> cursor(idx.list_offsets_.begin(), idx.list_offsets_.end() - 1);
  idx.ids_.resize(count);
  idx.data_.resize(count * dim);
  for (std::size_t e = 0; e < count; ++e) {
    std::size_t slot = cursor[labels[e]]++;
    idx.ids_[slot] = entries[e].id;
    std::copy_n(data.data() + e * dim, dim, idx.data_.data() + slot * dim);
  }
  return idx;
}

std::span<const float> MipsIndex::centroid(std::size_t c) const {
  return std::span<const float>(centroids_).subspan(c * shape_.size(), shape_.size());
}

std::vector<std::vector<SetId>> MipsIndex::posting_lists() const {
  std::vector<std::vector<SetId>> out(leaves());
  for (std::size_t c = 0; c < leaves(); ++c) {
    out[c].assign(ids_.begin() + static_cast<std::ptrdiff_t>(list_offsets_[c]),
                  ids_.begin() + static_cast<std::ptrdiff_t>(list_offsets_[c + 1]));
  }
  return out;
}

void MipsIndex::check_query(const LongVector& q) const {
  if (!(q.shape() == shape_)) {
    throw InvalidInput("mips search: query shape (" + std::to_string(q.shape().n) + "," +
                       std::to_string(q.shape().k) + "," + std::to_string(q.shape().dim) +
                       ") != index shape (" + std::to_string(shape_.n) + "," +
                       std::to_string(shape_.k) + "," + std::to_string(shape_.dim) + ")");
  }
}

std::vector<std::size_t> MipsIndex::probe_lists(const LongVector& query, std::size_t probes) const {
  check_query(query);
  const std::size_t dim = shape_.size();
  std::vector<std::pair<float, std::size_t>> scored;
  for (std::size_t c = 0; c < leaves(); ++c) {
    if (list_offsets_[c] == list_offsets_[c + 1]) continue;
    scored.emplace_back(kernels::dot_f32(query.data().data(), centroids_.data() + c * dim, dim), c);
  }
  std::size_t take = std::min(probes, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t t = 0; t < take; ++t) out.push_back(scored[t].second);
  return out;
}

std::vector<SearchHit> MipsIndex::search(const LongVector& query, std::size_t top_r,
                                         std::size_t probes) const {
  return std::move(search_batch(std::span<const LongVector>(&query, 1), top_r, probes).front());
}

std::vector<std::vector<SearchHit>> MipsIndex::search_batch(std::span<const LongVector> queries,
                                                            std::size_t top_r,
                                                            std::size_t probes) const {
  if (top_r == 0) throw InvalidInput("mips search: top_r must be positive");
  for (const auto& q : queries) check_query(q);
  const std::size_t dim = shape_.size();
  std::vector<TopCollector> collectors(queries.size(), TopCollector(top_r));

  auto scan = [&](std::size_t lo, std::size_t hi, const std::vector<std::size_t>& who) {
    for (std::size_t e = lo; e < hi; ++e) {
      const float* x = row(e);
      for (std::size_t q : who) {
        collectors[q].offer(ids_[e], kernels::dot_f32(queries[q].data().data(), x, dim));
      }
    }
  };

  if (backend_ == Backend::flat) {
    std::vector<std::size_t> all(queries.size());
    std::iota(all.begin(), all.end(), 0);
    scan(0, ids_.size(), all);
  } else {
    if (probes == 0) throw InvalidInput("mips search: probes must be positive");
    std::vector<std::vector<std::size_t>> probers(leaves());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      for (std::size_t c : probe_lists(queries[q], probes)) probers[c].push_back(q);
    }
    for (std::size_t c = 0; c < leaves(); ++c) {
      if (!probers[c].empty()) scan(list_offsets_[c], list_offsets_[c + 1], probers[c]);
    }
  }

  std::vector<std::vector<SearchHit>> out;
  out.reserve(queries.size());
  for (auto& c : collectors) out.push_back(c.take());
  return out;
}

void MipsIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  auto put32 = [&](std::size_t v) {
    if (v > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
      throw FormatError("index header field overflows int32");
    }
    binio::write(out, static_cast<std::int32_t>(v));
  };
  put32(shape_.n);
  put32(shape_.k);
  put32(shape_.dim);
  put32(backend_ == Backend::flat ? 0 : 1);
  put32(ids_.size());
  put32(leaves());
  binio::write_floats(out, centroids_);
  const std::size_t dim = shape_.size();
  for (std::size_t e = 0; e < ids_.size(); ++e) {
    binio::write(out, static_cast<std::uint64_t>(ids_[e]));
    binio::write_floats(out, std::span<const float>(row(e), dim));
  }
  if (!out) throw FormatError("write failed: " + path);
}

MipsIndex MipsIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(magic)) ||
      !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw FormatError(path + ": not a VSLV1 index file");
  }
  auto get32 = [&](const char* what) {
    auto v = binio::read<std::int32_t>(in, path + " header " + what);
    if (v < 0) throw FormatError(path + ": negative header field " + what);
    return static_cast<std::size_t>(v);
  };
  MipsIndex idx;
  idx.shape_.n = get32("n");
  idx.shape_.k = get32("k");
  idx.shape_.dim = get32("dim");
  std::size_t variant = get32("variant");
  std::size_t count = get32("count");
  std::size_t leaves = get32("leaves");
  if (variant > 1) throw FormatError(path + ": unknown index variant");
  if (idx.shape_.size() == 0) throw FormatError(path + ": empty shape");
  idx.backend_ = variant == 0 ? Backend::flat : Backend::ivf;
  if (idx.backend_ == Backend::flat && leaves != 0) throw FormatError(path + ": flat index with leaves");
  if (idx.backend_ == Backend::ivf && (leaves == 0 || leaves > count)) {
    throw FormatError(path + ": invalid leaf count");
  }
  const std::size_t dim = idx.shape_.size();
  idx.centroids_.resize(leaves * dim);
  binio::read_floats(in, idx.centroids_, path + " centroids");
  idx.ids_.resize(count);
  idx.data_.resize(count * dim);
  for (std::size_t e = 0; e < count; ++e) {
    idx.ids_[e] = binio::read<std::uint64_t>(in, path + " entry id");
    binio::read_floats(in, std::span<float>(idx.data_.data() + e * dim, dim), path + " entry");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes");

  if (idx.backend_ == Backend::ivf) {
    // Posting lists are not stored; they are the nearest-centroid assignment, recomputed.
    auto labels = assign(idx.data_, count, idx.centroids_, leaves, dim, 1);
    idx.list_offsets_.assign(leaves + 1, 0);
    for (auto l : labels) ++idx.list_offsets_[l + 1];
    std::partial_sum(idx.list_offsets_.begin(), idx.list_offsets_.end(), idx.list_offsets_.begin());
    std::vector<std::size_t> cursor(idx.list_offsets_.begin(), idx.list_offsets_.end() - 1);
    std::vector<SetId> ids(count);
    std::vector<float> data(count * dim);
    for (std::size_t e = 0; e < count; ++e) {
      std::size_t slot = cursor[labels[e]]++;
      ids[slot] = idx.ids_[e];
      std::copy_n(idx.data_.data() + e * dim, dim, data.data() + slot * dim);
    }
    idx.ids_ = std::move(ids);
    idx.data_ = std::move(data);
  }
  return idx;
}

}  // namespace vecset
