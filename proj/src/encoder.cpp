#include "vecset/encoder.hpp"

#include <algorithm>
#include <string>

#include "vecset/errors.hpp"

namespace vecset {

namespace {

void check_card(std::size_t card, std::size_t max_card, const char* what) {
  if (card < 1 || card > max_card) {
    throw InvalidInput(std::string(what) + " " + std::to_string(card) + " outside [1, " +
                       std::to_string(max_card) + "]");
  }
}

std::vector<std::vector<double>> normalized_members(const VectorSet& s, const SimParams& p) {
  std::vector<std::vector<double>> out;
  out.reserve(s.members.size());
  for (const auto& m : s.members) {
    if (m.size() != p.dim) {
      throw InvalidInput("member dimension " + std::to_string(m.size()) + " != " +
                         std::to_string(p.dim));
    }
    out.push_back(normalized(m));
  }
  return out;
}

void fill_block(std::span<float> block, const std::vector<double>& src) {
  std::transform(src.begin(), src.end(), block.begin(),
                 [](double x) { return static_cast<float>(x); });
}

}  // namespace

LongVector::LongVector(LongShape shape, LongKind kind)
    : shape_(shape), kind_(kind), data_(shape.size(), 0.0f) {}

LongVector::LongVector(LongShape shape, LongKind kind, std::vector<float> data)
    : shape_(shape), kind_(kind), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw InvalidInput("long vector buffer of " + std::to_string(data_.size()) +
                       " floats does not match shape size " + std::to_string(shape_.size()));
  }
}

std::span<const float> LongVector::block(std::size_t p) const {
  return std::span<const float>(data_).subspan(p * shape_.dim, shape_.dim);
}

std::span<float> LongVector::block(std::size_t p) {
  return std::span<float>(data_).subspan(p * shape_.dim, shape_.dim);
}

LongVector encode_candidate(const VectorSet& v, std::size_t n, const SimParams& p) {
  check_card(v.members.size(), p.max_card, "candidate cardinality");
  check_card(n, p.max_card, "assumed target cardinality");
  auto unit = normalized_members(v, p);
  LongVector out({n, v.members.size(), p.dim}, LongKind::candidate);
  for (std::size_t j = 0; j < unit.size(); ++j) {
    for (std::size_t t = 0; t < n; ++t) fill_block(out.block(layout::candidate_block(j, t, n)), unit[j]);
  }
  return out;
}

LongVector encode_target_base(const VectorSet& a, std::size_t k, const SimParams& p) {
  check_card(a.members.size(), p.max_card, "target cardinality");
  check_card(k, p.max_card, "assumed candidate cardinality");
  auto unit = normalized_members(a, p);
  const std::size_t a_card = unit.size();
  LongVector out({a_card, k, p.dim}, LongKind::target);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < a_card; ++i) {
      fill_block(out.block(layout::target_block(i, c, a_card)), unit[i]);
    }
  }
  return out;
}

LongVector selector(std::size_t i, std::size_t j, std::size_t a_card, std::size_t k,
                    std::size_t dim) {
  if (a_card == 0 || k == 0 || dim == 0) throw InvalidInput("selector: empty shape");
  if (i >= a_card || j >= k) {
    throw InvalidInput("selector: pair (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") outside " + std::to_string(a_card) + " x " + std::to_string(k));
  }
  LongVector out({a_card, k, dim}, LongKind::selector);
  auto b = out.block(layout::pair_block(i, j, a_card));
  std::fill(b.begin(), b.end(), 1.0f);
  return out;
}

LongVector hadamard(const LongVector& x, const LongVector& y) {
  if (!(x.shape() == y.shape())) throw InvalidInput("hadamard: shape mismatch");
  std::vector<float> out(x.data().size());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = x.data()[q] * y.data()[q];
  return LongVector(x.shape(), LongKind::target, std::move(out));
}

std::vector<TargetVector> encode_targets(const VectorSet& a, std::size_t k, const SimParams& p) {
  p.validate();
  check_card(a.members.size(), p.max_card, "target cardinality");
  check_card(k, p.max_card, "assumed candidate cardinality");
  auto unit = normalized_members(a, p);
  const std::size_t a_card = unit.size();
  const double total = p.w_max + p.w_avg;
  const double base_coef = p.w_avg / (static_cast<double>(a_card * k) * total);
  const double max_coef = p.w_max / total;
  const LongShape shape{a_card, k, p.dim};

  // Every block of L_A scaled by the average weight; the selected block also gets w_max.
  std::vector<float> base(shape.size());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < a_card; ++i) {
      std::size_t off = layout::target_block(i, c, a_card) * p.dim;
      for (std::size_t d = 0; d < p.dim; ++d) base[off + d] = static_cast<float>(base_coef * unit[i][d]);
    }
  }

  std::vector<TargetVector> out;
  out.reserve(a_card * k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < a_card; ++i) {
      std::vector<float> data = base;
      std::size_t off = layout::pair_block(i, j, a_card) * p.dim;
      for (std::size_t d = 0; d < p.dim; ++d) {
        data[off + d] = static_cast<float>((max_coef + base_coef) * unit[i][d]);
      }
      out.push_back({i, j, LongVector(shape, LongKind::target, std::move(data))});
    }
  }
  return out;
}

double dot(const LongVector& x, const LongVector& y) {
  if (!(x.shape() == y.shape())) {
    throw InvalidInput("dot: shape mismatch (" + std::to_string(x.shape().n) + "," +
                       std::to_string(x.shape().k) + "," + std::to_string(x.shape().dim) +
                       ") vs (" + std::to_string(y.shape().n) + "," + std::to_string(y.shape().k) +
                       "," + std::to_string(y.shape().dim) + ")");
  }
  double s = 0.0;
  auto a = x.data();
  auto b = y.data();
  for (std::size_t q = 0; q < a.size(); ++q) s += static_cast<double>(a[q]) * b[q];
  return s;
}

}  // namespace vecset
