#pragma once

#include <cstdint>
#include <vector>

#include "privml/errors.hpp"
#include "privml/sparse_vec.hpp"

namespace privml {

// L x n label matrix with entries in {-1, +1}, stored row-major so a label's
// row (all examples) is contiguous.
class LabelMatrix {
public:
  LabelMatrix() = default;
  LabelMatrix(int labels, int examples)
      : L_(labels), n_(examples), a_(static_cast<std::size_t>(labels) * examples, -1) {}

  int num_labels() const { return L_; }
  int num_examples() const { return n_; }

  std::int8_t operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  void set(int i, int j, std::int8_t v) { a_[static_cast<std::size_t>(i) * n_ + j] = v; }

  const std::int8_t* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * n_; }

  void validate() const {
    for (std::int8_t v : a_)
      if (v != 1 && v != -1) throw ValidationError("LabelMatrix: entry not in {-1,+1}");
  }

  friend bool operator==(const LabelMatrix& x, const LabelMatrix& y) {
    return x.L_ == y.L_ && x.n_ == y.n_ && x.a_ == y.a_;
  }

private:
  int L_ = 0;
  int n_ = 0;
  std::vector<std::int8_t> a_;
};

// Bias-augmented sparse features plus the +/-1 label matrix.
struct Dataset {
  std::vector<SparseVec> features;  // n vectors, each of dim d
  LabelMatrix labels;               // L x n
  int n = 0;
  int d = 0;  // includes the bias coordinate when loaded through data_io
  int L = 0;

  void validate() const {
    if (n < 1 || d < 1 || L < 1) throw ValidationError("Dataset: n, d, L must be >= 1");
    if (static_cast<int>(features.size()) != n)
      throw ValidationError("Dataset: feature count != n");
    for (const SparseVec& x : features)
      if (x.dim != d) throw DimensionError("Dataset: feature dim mismatch");
    if (labels.num_labels() != L || labels.num_examples() != n)
      throw DimensionError("Dataset: label matrix shape mismatch");
    labels.validate();
  }
};

}  // namespace privml
