#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "privml/features.hpp"
#include "privml/priv_source.hpp"

namespace privml {

// One absorbed-bias SVM+ instance:
//
//   max_{a>=0, b>=0}  -1/2 (a o y)^T K (a o y) + 1^T a
//                     - 1/(2 gamma) (a + b - C 1)^T Kt (a + b - C 1)
//
// K comes from `feats`, the block-diagonal Kt from `priv`. The same form
// serves the per-label subproblem and the dictionary subproblem.
struct SvmPlusProblem {
  const FeatureSet* feats = nullptr;
  const PrivSource* priv = nullptr;
  std::vector<std::int8_t> y;  // length m, entries +/-1
  double gamma = 1.0;
  double cost = 1.0;

  int size() const { return feats ? feats->size() : 0; }
  void validate() const;
};

// Live state of the coordinate descent sweep. eta = [alpha; beta]; the primal
// accumulator and the per-block correcting vectors are maintained
// incrementally and kept consistent with the KKT expressions.
struct DualState {
  std::vector<double> eta;                  // 2m, componentwise >= 0
  std::vector<double> primal;               // sum_s alpha_s y_s feat(s)
  std::vector<std::vector<double>> wtilde;  // (1/gamma) sum_{s in b} (a+b-C) priv(s)
  std::vector<double> q;                    // 2m diagonal; q[s] == 0 marks a skipped coordinate
  int epoch = 0;
  double max_violation = 0.0;

  std::size_t m() const { return eta.size() / 2; }
};

struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> primal;
  std::vector<std::vector<double>> wtilde;
  double dual_obj = 0.0;
  double primal_obj = 0.0;
  double gap = 0.0;
  int epochs = 0;
  bool converged = false;
  // alpha coordinates with zero feature AND zero privileged vector; their
  // margin constraint is unsatisfiable, so they are pinned at zero.
  int skipped = 0;
};

// epoch index, max projected-gradient violation of the sweep, dual objective
using TraceSink = std::function<void(int, double, double)>;

// eta = 0, primal = 0, wtilde_b = -(C/gamma) sum_{s in b} priv(s), and the
// diagonal Q (alpha: |feat|^2 + |priv|^2/gamma, beta: |priv|^2/gamma).
DualState init_state(const SvmPlusProblem& p);

// One projected CD step on coordinate s in [0, 2m); alpha coords come first.
// Returns the projected-gradient violation |min(eta_s, grad_s)| measured
// before the step. Coordinates with q[s] == 0 are skipped.
double cd_step(const SvmPlusProblem& p, DualState& st, int s);

// Sweeps a fresh seeded permutation of all 2m coordinates per epoch until the
// epoch's max violation is at or below tol and the duality gap certificate
// (gap <= 10 tol, gap >= -1e-9) holds, or max_epochs is reached.
DualSolution solve_svmplus(const SvmPlusProblem& p, double tol, int max_epochs,
                           std::uint64_t seed, const TraceSink& sink = {});

// Dual objective at raw multipliers, via the accumulated primal and block
// correcting vectors; no kernel matrix is formed.
double dual_objective(const SvmPlusProblem& p, std::span<const double> alpha,
                      std::span<const double> beta);

// Primal objective 1/2|w|^2 + gamma/2 sum_b |wt_b|^2 + C sum_s <wt, priv(s)>
// at a recovered point. Throws InfeasibleError when either constraint family
// is violated beyond 1e-6.
double primal_objective(const SvmPlusProblem& p, std::span<const double> primal,
                        const std::vector<std::vector<double>>& wtilde);

// Independent test oracle: dense QP over the nonnegative orthant solved by
// accelerated projected gradient, certified by projected-gradient norm
// <= 1e-8. Guarded to m <= 10.
DualSolution brute_force_qp(const SvmPlusProblem& p);

// Internal helpers shared with the trainers and tests.
namespace detail {
void refresh_accumulators(const SvmPlusProblem& p, DualState& st);
double dual_from_state(const SvmPlusProblem& p, const DualState& st);
double primal_from_state(const SvmPlusProblem& p, const DualState& st);
}  // namespace detail

}  // namespace privml
