#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "privml/errors.hpp"

namespace privml {

// Sparse feature vector: strictly ascending indices < dim, finite values.
struct SparseVec {
  std::vector<std::int32_t> indices;
  std::vector<double> values;
  std::int32_t dim = 0;

  SparseVec() = default;
  SparseVec(std::vector<std::int32_t> idx, std::vector<double> val, std::int32_t d);

  int nnz() const { return static_cast<int>(indices.size()); }
  double norm_sq() const;
};

// <x, w> against a dense vector of length x.dim.
double dot(const SparseVec& x, std::span<const double> w);

// w += a * x
void axpy(double a, const SparseVec& x, std::span<double> w);

// <x, y> between two sparse vectors of equal dim.
double dot(const SparseVec& x, const SparseVec& y);

// Appends a constant-1 coordinate at index d0, so downstream linear models
// absorb the bias term. All inputs must share the same dim.
std::vector<SparseVec> augment_bias(const std::vector<SparseVec>& raw);

}  // namespace privml
