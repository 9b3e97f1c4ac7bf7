#include "vecset/kernels.hpp"

namespace vecset::kernels {

// 8 (or 4) interleaved partial sums combined in a fixed order.

float dot_f32(const float* a, const float* b, std::size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t q = 0;
  for (; q + 8 <= n; q += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += a[q + l] * b[q + l];
  }
  for (; q < n; ++q) acc[q & 7] += a[q] * b[q];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

double dot_f64(const float* a, const double* b, std::size_t n) {
  double acc[4] = {0, 0, 0, 0};
  std::size_t q = 0;
  for (; q + 4 <= n; q += 4) {
    for (int l = 0; l < 4; ++l) acc[l] += static_cast<double>(a[q + l]) * b[q + l];
  }
  for (; q < n; ++q) acc[q & 3] += static_cast<double>(a[q]) * b[q];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

float squared_l2(const float* a, const float* b, std::size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t q = 0;
  for (; q + 8 <= n; q += 8) {
    for (int l = 0; l < 8; ++l) {
      float d = a[q + l] - b[q + l];
      acc[l] += d * d;
    }
  }
  for (; q < n; ++q) {
    float d = a[q] - b[q];
    acc[q & 7] += d * d;
  }
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

}  // namespace vecset::kernels
