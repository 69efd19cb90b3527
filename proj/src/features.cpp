#include "privml/features.hpp"

namespace privml {

RankOneFeatures::RankOneFeatures(const Mat* w, const std::vector<SparseVec>* x, int d)
    : w_(w),
      x_(x),
      k_(w->rows()),
      num_labels_(w->cols()),
      num_examples_(static_cast<int>(x->size())),
      d_(d) {
  for (const SparseVec& col : *x)
    if (col.dim != d_) throw DimensionError("RankOneFeatures: feature dim mismatch");
  w_norm_sq_.resize(num_labels_);
  for (int i = 0; i < num_labels_; ++i) {
    double s = 0.0;
    for (int r = 0; r < k_; ++r) s += (*w_)(r, i) * (*w_)(r, i);
    w_norm_sq_[i] = s;
  }
  x_norm_sq_.resize(num_examples_);
  for (int j = 0; j < num_examples_; ++j) x_norm_sq_[j] = (*x_)[j].norm_sq();
}

double RankOneFeatures::dot_primal(std::span<const double> primal, int s) const {
  const int i = label_of(s);
  const SparseVec& xj = (*x_)[example_of(s)];
  // w_i^T (D x_j), reading length-k rows of the transposed accumulator
  double acc = 0.0;
  for (std::size_t t = 0; t < xj.indices.size(); ++t) {
    const double* prow = primal.data() + static_cast<std::size_t>(xj.indices[t]) * k_;
    double partial = 0.0;
    for (int r = 0; r < k_; ++r) partial += prow[r] * (*w_)(r, i);
    acc += xj.values[t] * partial;
  }
  return acc;
}

void RankOneFeatures::add_to_primal(std::span<double> primal, double coef, int s) const {
  const int i = label_of(s);
  const SparseVec& xj = (*x_)[example_of(s)];
  for (std::size_t t = 0; t < xj.indices.size(); ++t) {
    double* prow = primal.data() + static_cast<std::size_t>(xj.indices[t]) * k_;
    const double c = coef * xj.values[t];
    for (int r = 0; r < k_; ++r) prow[r] += c * (*w_)(r, i);
  }
}

double RankOneFeatures::dot_pair(int s, int t) const {
  const int i = label_of(s), p = label_of(t);
  double ww = 0.0;
  for (int r = 0; r < k_; ++r) ww += (*w_)(r, i) * (*w_)(r, p);
  return ww * dot((*x_)[example_of(s)], (*x_)[example_of(t)]);
}

Mat RankOneFeatures::unpack_dictionary(std::span<const double> primal) const {
  Mat d_mat(k_, d_);
  for (int c = 0; c < d_; ++c)
    for (int r = 0; r < k_; ++r) d_mat(r, c) = primal[static_cast<std::size_t>(c) * k_ + r];
  return d_mat;
}

}  // namespace privml
