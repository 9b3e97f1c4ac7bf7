#pragma once

#include <cstddef>

namespace vecset::kernels {

// Compiled once in kernels.cpp: a given pair of buffers always yields the same value,
// whichever translation unit calls it and wherever the buffers live.

float dot_f32(const float* a, const float* b, std::size_t n);
/// Float storage, double accumulation.
double dot_f64(const float* a, const double* b, std::size_t n);
float squared_l2(const float* a, const float* b, std::size_t n);

}  // namespace vecset::kernels
