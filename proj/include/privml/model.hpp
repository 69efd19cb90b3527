#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "privml/hyperparams.hpp"
#include "privml/mat.hpp"
#include "privml/privileged.hpp"
#include "privml/sparse_vec.hpp"

namespace privml {

// Low-rank multi-label predictor Z = D^T W plus the per-label correcting
// weights learned alongside it. Immutable after training; prediction is pure.
struct Model {
  Mat d_mat;  // k x d hypothesis dictionary
  Mat w_mat;  // k x L coefficients, column i generates label i's predictor
  std::vector<std::vector<double>> w_tilde;  // L correcting vectors, |pool(i)| each
  PrivilegedSet pools;
  Hyperparams hp;

  int k() const { return d_mat.rows(); }
  int d() const { return d_mat.cols(); }
  int num_labels() const { return w_mat.cols(); }

  void validate() const;
};

// Scores s_i = <w_i, D x> for every label, evaluated as W^T (D x).
std::vector<double> predict_scores(const Model& m, const SparseVec& x);

// Thresholds scores at zero; sign(0) = +1. Throws on non-finite scores.
std::vector<std::int8_t> predict_labels(std::span<const double> scores);

// Self-describing text persistence; round-trips bit-identically.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace privml
