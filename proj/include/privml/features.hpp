#pragma once

#include <span>
#include <vector>

#include "privml/mat.hpp"
#include "privml/sparse_vec.hpp"

namespace privml {

// Decision-space objects feat(s) whose pairwise inner products form the
// kernel of the hinge dual. The solver never materializes the kernel; it only
// needs norms, dots against the maintained primal accumulator, and rank-one
// style updates of that accumulator.
class FeatureSet {
public:
  virtual ~FeatureSet() = default;

  virtual int size() const = 0;        // number of objects m
  virtual int primal_dim() const = 0;  // flattened accumulator length

  virtual double norm_sq(int s) const = 0;
  // <primal, feat(s)>
  virtual double dot_primal(std::span<const double> primal, int s) const = 0;
  // primal += coef * feat(s)
  virtual void add_to_primal(std::span<double> primal, double coef, int s) const = 0;
  // Kernel entry <feat(s), feat(t)>; used by the brute-force oracle and the
  // dense cross-checks, never by the CD sweep.
  virtual double dot_pair(int s, int t) const = 0;
};

// m x dim row-major matrix of dense feature rows. Backs the W-subproblem
// (rows are the projected inputs D x_j) and synthetic test instances.
class DenseRowFeatures final : public FeatureSet {
public:
  explicit DenseRowFeatures(Mat rows) : rows_(std::move(rows)) {}

  int size() const override { return rows_.rows(); }
  int primal_dim() const override { return rows_.cols(); }
  double norm_sq(int s) const override { return privml::norm_sq(rows_.row(s)); }
  double dot_primal(std::span<const double> primal, int s) const override {
    return dot(primal, rows_.row(s));
  }
  void add_to_primal(std::span<double> primal, double coef, int s) const override {
    axpy(coef, rows_.row(s), primal);
  }
  double dot_pair(int s, int t) const override { return dot(rows_.row(s), rows_.row(t)); }

  const Mat& rows() const { return rows_; }

private:
  Mat rows_;
};

// Sparse input columns x_j used directly (the Binary Relevance geometry).
class SparseColumnFeatures final : public FeatureSet {
public:
  SparseColumnFeatures(const std::vector<SparseVec>* cols, int dim) : cols_(cols), dim_(dim) {}

  int size() const override { return static_cast<int>(cols_->size()); }
  int primal_dim() const override { return dim_; }
  double norm_sq(int s) const override { return (*cols_)[s].norm_sq(); }
  double dot_primal(std::span<const double> primal, int s) const override {
    return dot((*cols_)[s], primal);
  }
  void add_to_primal(std::span<double> primal, double coef, int s) const override {
    axpy(coef, (*cols_)[s], primal);
  }
  double dot_pair(int s, int t) const override { return dot((*cols_)[s], (*cols_)[t]); }

private:
  const std::vector<SparseVec>* cols_;
  int dim_;
};

// Rank-one objects G_{ij} = w_i x_j^T indexed by the flattened pair
// s = i*n + j. Inner products factor as <w_i,w_p><x_j,x_q>, so nothing is
// materialized. The accumulator is stored TRANSPOSED (d x k row-major): both
// the gradient dot w_i^T (P^T x_j) and the update P^T += coef * x_j w_i^T then
// touch contiguous length-k rows per feature nonzero.
class RankOneFeatures final : public FeatureSet {
public:
  RankOneFeatures(const Mat* w, const std::vector<SparseVec>* x, int d);

  int size() const override { return num_labels_ * num_examples_; }
  int primal_dim() const override { return d_ * k_; }
  double norm_sq(int s) const override {
    return w_norm_sq_[label_of(s)] * x_norm_sq_[example_of(s)];
  }
  double dot_primal(std::span<const double> primal, int s) const override;
  void add_to_primal(std::span<double> primal, double coef, int s) const override;
  double dot_pair(int s, int t) const override;

  int label_of(int s) const { return s / num_examples_; }
  int example_of(int s) const { return s % num_examples_; }

  // Reassembles the k x d dictionary from the transposed accumulator.
  Mat unpack_dictionary(std::span<const double> primal) const;

private:
  const Mat* w_;                     // k x L coefficients
  const std::vector<SparseVec>* x_;  // n sparse columns of dim d
  int k_, num_labels_, num_examples_, d_;
  std::vector<double> w_norm_sq_;
  std::vector<double> x_norm_sq_;
};

}  // namespace privml
