#pragma once

#include <span>
#include <vector>

#include "privml/dataset.hpp"
#include "privml/privileged.hpp"

namespace privml {

// Privileged vectors and their block structure. Vectors of different blocks
// never interact (the privileged kernel is block diagonal), so each block
// owns one correcting vector.
class PrivSource {
public:
  virtual ~PrivSource() = default;

  virtual int size() const = 0;  // m, aligned with the FeatureSet
  virtual int num_blocks() const = 0;
  virtual int block_of(int s) const = 0;
  virtual int block_dim(int b) const = 0;

  virtual double norm_sq(int s) const = 0;
  // <wt, priv(s)> where wt is the correcting vector of block_of(s)
  virtual double dot(std::span<const double> wt, int s) const = 0;
  // wt += coef * priv(s)
  virtual void add(std::span<double> wt, double coef, int s) const = 0;
  // <priv(s), priv(t)>; zero across blocks
  virtual double dot_pair(int s, int t) const = 0;
};

// Explicit vectors with explicit block ids; generic instances and tests.
class DensePrivSource final : public PrivSource {
public:
  DensePrivSource(std::vector<std::vector<double>> vecs, std::vector<int> block_ids,
                  int num_blocks);
  // single-block convenience
  explicit DensePrivSource(std::vector<std::vector<double>> vecs);

  int size() const override { return static_cast<int>(vecs_.size()); }
  int num_blocks() const override { return num_blocks_; }
  int block_of(int s) const override { return block_ids_[s]; }
  int block_dim(int b) const override { return block_dims_[b]; }
  double norm_sq(int s) const override;
  double dot(std::span<const double> wt, int s) const override;
  void add(std::span<double> wt, double coef, int s) const override;
  double dot_pair(int s, int t) const override;

private:
  std::vector<std::vector<double>> vecs_;
  std::vector<int> block_ids_;
  std::vector<int> block_dims_;
  int num_blocks_;
};

// Privileged label features read straight out of the label matrix through the
// pools; nothing is materialized. Covers both the per-label subproblem
// (single block, s = example) and the dictionary subproblem (block = label,
// s = i*n + j).
class PooledPrivSource final : public PrivSource {
public:
  // Per-label view: priv(j) = y~_{label,j}, one block.
  PooledPrivSource(const LabelMatrix* y, const PrivilegedSet* pools, int label);
  // All-labels view over s = i*n + j.
  PooledPrivSource(const LabelMatrix* y, const PrivilegedSet* pools);

  int size() const override { return single_label_ >= 0 ? y_->num_examples() : y_->num_labels() * y_->num_examples(); }
  int num_blocks() const override { return single_label_ >= 0 ? 1 : y_->num_labels(); }
  int block_of(int s) const override { return single_label_ >= 0 ? 0 : s / y_->num_examples(); }
  int block_dim(int b) const override {
    return pools_->priv_dim(single_label_ >= 0 ? single_label_ : b);
  }
  double norm_sq(int s) const override { return block_dim(block_of(s)); }  // entries are +/-1
  double dot(std::span<const double> wt, int s) const override;
  void add(std::span<double> wt, double coef, int s) const override;
  double dot_pair(int s, int t) const override;

private:
  int label_at(int s) const { return single_label_ >= 0 ? single_label_ : s / y_->num_examples(); }
  int example_at(int s) const {
    return single_label_ >= 0 ? s : s % y_->num_examples();
  }

  const LabelMatrix* y_;
  const PrivilegedSet* pools_;
  int single_label_;  // -1 in all-labels mode
};

}  // namespace privml
