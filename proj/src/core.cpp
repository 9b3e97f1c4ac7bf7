#include "vecset/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vecset/errors.hpp"

namespace vecset {

void SimParams::validate() const {
  if (!(w_max >= 0.0) || !(w_avg >= 0.0)) {
    throw InvalidInput("similarity weights must be nonnegative");
  }
  if (!(w_max + w_avg > 0.0)) {
    throw InvalidInput("w_max + w_avg must be positive");
  }
  if (dim == 0) throw InvalidInput("dimension must be positive");
  if (max_card == 0) throw InvalidInput("max cardinality must be positive");
}

PairwiseSims::PairwiseSims(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0 || values_.size() != rows_ * cols_) {
    throw InvalidInput("pairwise similarity table has inconsistent size");
  }
}

double PairwiseSims::max() const { return *std::max_element(values_.begin(), values_.end()); }

double PairwiseSims::min() const { return *std::min_element(values_.begin(), values_.end()); }

double PairwiseSims::sum() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return s;
}

double PairwiseSims::avg() const { return sum() / static_cast<double>(values_.size()); }

double norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
  double na = norm(a);
  double nb = norm(b);
  if (na <= kMinNorm || nb <= kMinNorm) {
    throw DegenerateVector("cosine: vector norm below threshold");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += static_cast<double>(a[i]) * b[i];
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

PairwiseSims pairwise_sims(const VectorSet& a, const VectorSet& v) {
  if (a.members.empty() || v.members.empty()) {
    throw InvalidInput("pairwise_sims: empty set");
  }
  std::vector<double> values;
  values.reserve(a.members.size() * v.members.size());
  for (const auto& ai : a.members) {
    for (const auto& vj : v.members) values.push_back(cosine(ai, vj));
  }
  return PairwiseSims(a.members.size(), v.members.size(), std::move(values));
}

double set_similarity(const VectorSet& a, const VectorSet& v, const SimParams& p) {
  auto ps = pairwise_sims(a, v);
  return (p.w_max * ps.max() + p.w_avg * ps.avg()) / (p.w_max + p.w_avg);
}

void validate_set(const VectorSet& s, const SimParams& p) {
  if (s.members.empty()) {
    throw InvalidInput("set " + std::to_string(s.id) + " is empty");
  }
  if (s.members.size() > p.max_card) {
    throw InvalidInput("set " + std::to_string(s.id) + " has cardinality " +
                       std::to_string(s.members.size()) + " > max " + std::to_string(p.max_card));
  }
  for (const auto& m : s.members) {
    if (m.size() != p.dim) {
      throw InvalidInput("set " + std::to_string(s.id) + " has a member of dimension " +
                         std::to_string(m.size()) + ", expected " + std::to_string(p.dim));
    }
    if (norm(m) <= kMinNorm) {
      throw DegenerateVector("set " + std::to_string(s.id) + " has a near-zero member");
    }
  }
}

std::vector<double> normalized(std::span<const float> v) {
  double n = norm(v);
  if (n <= kMinNorm) throw DegenerateVector("cannot normalize a near-zero vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

}  // namespace vecset
