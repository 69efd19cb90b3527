#include "privml/privileged.hpp"

#include <algorithm>
#include <string>

namespace privml {

void PrivilegedSet::validate(int L) const {
  if (num_labels() != L) throw DimensionError("PrivilegedSet: pool count != L");
  for (int i = 0; i < L; ++i) {
    std::int32_t prev = -1;
    for (std::int32_t p : pools[i]) {
      if (p < 0 || p >= L) throw ValidationError("PrivilegedSet: pool entry out of range");
      if (p == i) throw ValidationError("PrivilegedSet: label in its own pool");
      if (p <= prev) throw ValidationError("PrivilegedSet: pool not strictly ascending");
      prev = p;
    }
  }
}

int label_row_hamming(const LabelMatrix& Y, int i, int p) {
  const std::int8_t* a = Y.row(i);
  const std::int8_t* b = Y.row(p);
  int dist = 0;
  for (int j = 0; j < Y.num_examples(); ++j) dist += (a[j] != b[j]);
  return dist;
}

PrivilegedSet build_label_pools(const LabelMatrix& Y, int K) {
  const int L = Y.num_labels();
  if (K < 0 || K > L - 1)
    throw ValidationError("build_label_pools: K = " + std::to_string(K) +
                          " out of range [0, " + std::to_string(L - 1) + "]");
  PrivilegedSet ps;
  ps.pools.assign(L, {});
  if (K == 0) return ps;

  std::vector<std::pair<int, std::int32_t>> cand;  // (distance, label)
  for (int i = 0; i < L; ++i) {
    cand.clear();
    for (std::int32_t p = 0; p < L; ++p) {
      if (p == i) continue;
      cand.emplace_back(label_row_hamming(Y, i, p), p);
    }
    // nearest K, distance ties toward the smaller label index
    std::sort(cand.begin(), cand.end());
    std::vector<std::int32_t>& pool = ps.pools[i];
    pool.reserve(K);
    for (int t = 0; t < K; ++t) pool.push_back(cand[t].second);
    std::sort(pool.begin(), pool.end());
  }
  return ps;
}

std::vector<double> privileged_feature(const LabelMatrix& Y, int i, int j,
                                       const PrivilegedSet& pools) {
  if (i < 0 || i >= Y.num_labels()) throw DimensionError("privileged_feature: label out of range");
  if (j < 0 || j >= Y.num_examples())
    throw DimensionError("privileged_feature: example out of range");
  if (pools.num_labels() != Y.num_labels())
    throw DimensionError("privileged_feature: pools do not match Y");
  const std::vector<std::int32_t>& pool = pools.pool(i);
  std::vector<double> out(pool.size());
  for (std::size_t t = 0; t < pool.size(); ++t) out[t] = Y(pool[t], j);
  return out;
}

double correcting_value(std::span<const double> w_tilde_i, std::span<const double> y_tilde) {
  if (w_tilde_i.size() != y_tilde.size())
    throw DimensionError("correcting_value: length mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < w_tilde_i.size(); ++t) s += w_tilde_i[t] * y_tilde[t];
  return s;
}

}  // namespace privml
