#pragma once

#include <atomic>
#include <cstdint>
#include <utility>
#include <vector>

#include "privml/dataset.hpp"
#include "privml/hyperparams.hpp"
#include "privml/model.hpp"

namespace privml {

// Row-based flattening of (label, example) pairs, 1-based on both sides:
// phi([i,j]) = (i-1) n + j.
struct PhiIndex {
  int L = 0;
  int n = 0;

  int phi(int i, int j) const;
  std::pair<int, int> phi_inv(int s) const;
};

struct OuterRecord {
  int iter = 0;          // 1-based outer iteration
  double objective = 0;  // full-model objective at the end of the iteration
  double delta_barometer = 0;  // ||change of the correcting weights||_F (relative)
  long w_epochs = 0;
  long d_epochs = 0;
  double seconds = 0;
  bool w_converged = true;
  bool d_converged = true;
};

struct TrainTrace {
  std::vector<OuterRecord> records;
  bool converged = false;
  double total_seconds = 0;
};

struct TrainResult {
  Model model;
  TrainTrace trace;
};

struct WStepResult {
  Mat w_mat;  // k x L
  std::vector<std::vector<double>> w_tilde;
  bool converged = true;
  long epochs = 0;
};

struct DStepResult {
  Mat d_mat;  // k x d
  std::vector<std::vector<double>> w_tilde;
  bool converged = true;
  long epochs = 0;
};

// L independent SVM+ solves with feat(j) = D x_j in the gamma2/gamma1,
// C/gamma1 rescaled units (same minimizer as the gamma1-weighted primal).
// tol_override > 0 replaces hp.inner_tol; seed_tag decorrelates restarts.
WStepResult w_step(const Mat& d_mat, const Dataset& data, const PrivilegedSet& pools,
                   const Hyperparams& hp, double tol_override = 0.0,
                   std::uint64_t seed_tag = 0);

// One SVM+ solve over all L*n flattened constraints with rank-one decision
// objects w_i x_j^T and the block-diagonal privileged kernel.
DStepResult d_step(const Mat& w_mat, const Dataset& data, const PrivilegedSet& pools,
                   const Hyperparams& hp, double tol_override = 0.0,
                   std::uint64_t seed_tag = 0);

// Full-model objective
//   1/2 |D|_F^2 + 1/2 sum_i (gamma1 |w_i|^2 + gamma2 |wt_i|^2)
//   + C sum_i sum_j <wt_i, y~_{i,j}>
// Throws InfeasibleError when a constraint is violated beyond 1e-6.
double prml_objective(const Model& m, const Dataset& data, const PrivilegedSet& pools,
                      const Hyperparams& hp);

// Alternating W-step / D-step training with the correcting weights as the
// convergence barometer.
TrainResult train_prml(const Dataset& data, const Hyperparams& hp,
                       const std::atomic<bool>* cancel = nullptr);

// Binary Relevance: L independent absorbed-bias SVMs on the raw features,
// packaged with an identity dictionary (k = d).
TrainResult train_br(const Dataset& data, const Hyperparams& hp);

// Privileged Binary Relevance: W pinned to the identity, L independent SVM+
// solves on the raw features. No alternation.
TrainResult train_prbr(const Dataset& data, const Hyperparams& hp);

// Low-rank ablation: same alternation as train_prml but with plain hinge
// duals (box [0, C], no correcting term).
TrainResult train_lowrank(const Dataset& data, const Hyperparams& hp,
                          const std::atomic<bool>* cancel = nullptr);

// Seeded Gaussian dictionary, entries N(0, 1/d).
Mat init_dictionary(int k, int d, std::uint64_t seed);

namespace detail {
// Objective value without the feasibility gate (monitoring); reports the
// worst constraint violation through *worst when non-null.
double prml_objective_raw(const Mat& d_mat, const Mat& w_mat,
                          const std::vector<std::vector<double>>& w_tilde, const Dataset& data,
                          const PrivilegedSet& pools, const Hyperparams& hp,
                          double* worst = nullptr);
// Hinge-slack objective of the no-privileged low-rank model.
double lowrank_objective(const Mat& d_mat, const Mat& w_mat, const Dataset& data, double cost);
}  // namespace detail

}  // namespace privml
