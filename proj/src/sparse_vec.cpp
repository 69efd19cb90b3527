#include "privml/sparse_vec.hpp"

#include <cmath>
#include <string>

namespace privml {

SparseVec::SparseVec(std::vector<std::int32_t> idx, std::vector<double> val, std::int32_t d)
    : indices(std::move(idx)), values(std::move(val)), dim(d) {
  if (indices.size() != values.size())
    throw ValidationError("SparseVec: index/value count mismatch");
  if (dim < 0) throw ValidationError("SparseVec: negative dim");
  std::int32_t prev = -1;
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const std::int32_t i = indices[t];
    if (i <= prev)
      throw ValidationError("SparseVec: indices not strictly ascending at position " +
                            std::to_string(t));
    if (i >= dim)
      throw ValidationError("SparseVec: index " + std::to_string(i) + " >= dim " +
                            std::to_string(dim));
    if (!std::isfinite(values[t]))
      throw ValidationError("SparseVec: non-finite value at index " + std::to_string(i));
    prev = i;
  }
}

double SparseVec::norm_sq() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

double dot(const SparseVec& x, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t t = 0; t < x.indices.size(); ++t) s += x.values[t] * w[x.indices[t]];
  return s;
}

void axpy(double a, const SparseVec& x, std::span<double> w) {
  for (std::size_t t = 0; t < x.indices.size(); ++t) w[x.indices[t]] += a * x.values[t];
}

double dot(const SparseVec& x, const SparseVec& y) {
  double s = 0.0;
  std::size_t a = 0, b = 0;
  while (a < x.indices.size() && b < y.indices.size()) {
    if (x.indices[a] == y.indices[b]) {
      s += x.values[a] * y.values[b];
      ++a;
      ++b;
    } else if (x.indices[a] < y.indices[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  return s;
}

std::vector<SparseVec> augment_bias(const std::vector<SparseVec>& raw) {
  std::int32_t d0 = raw.empty() ? 0 : raw.front().dim;
  std::vector<SparseVec> out;
  out.reserve(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const SparseVec& x = raw[j];
    if (x.dim != d0)
      throw DimensionError("augment_bias: example " + std::to_string(j) + " has dim " +
                           std::to_string(x.dim) + ", expected " + std::to_string(d0));
    std::vector<std::int32_t> idx = x.indices;
    std::vector<double> val = x.values;
    idx.push_back(d0);
    val.push_back(1.0);
    out.emplace_back(std::move(idx), std::move(val), d0 + 1);
  }
  return out;
}

}  // namespace privml
