#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "privml/dataset.hpp"
#include "privml/errors.hpp"

namespace privml {

// Per-label pools of "teacher" labels. pool(i) never contains i, entries are
// unique, ascending, in [0, L).
struct PrivilegedSet {
  std::vector<std::vector<std::int32_t>> pools;

  int num_labels() const { return static_cast<int>(pools.size()); }
  int priv_dim(int i) const { return static_cast<int>(pools[i].size()); }
  const std::vector<std::int32_t>& pool(int i) const { return pools[i]; }

  void validate(int L) const;

  friend bool operator==(const PrivilegedSet& a, const PrivilegedSet& b) {
    return a.pools == b.pools;
  }
};

// pools(i) = the K labels p != i whose rows of Y are closest to row i in
// Hamming distance over the training examples. Ties break toward the smaller
// label index. K = 0 yields empty pools (the degenerate no-teacher setup,
// forced when L = 1).
PrivilegedSet build_label_pools(const LabelMatrix& Y, int K);

// The privileged label feature of example j on label i: the values of the
// pool labels, the label's own coordinate excluded by construction.
std::vector<double> privileged_feature(const LabelMatrix& Y, int i, int j,
                                       const PrivilegedSet& pools);

// Correcting-function value <w_tilde_i, y_tilde>; stands in for the slack.
double correcting_value(std::span<const double> w_tilde_i, std::span<const double> y_tilde);

// Hamming distance between label rows i and p (count of differing examples).
int label_row_hamming(const LabelMatrix& Y, int i, int p);

}  // namespace privml
