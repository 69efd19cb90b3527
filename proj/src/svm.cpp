#include "privml/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "privml/errors.hpp"
#include "privml/rng.hpp"

namespace privml {

SvmSolution solve_svm(const FeatureSet& feats, std::span<const std::int8_t> y, double cost,
                      double tol, int max_epochs, std::uint64_t seed) {
  const int m = feats.size();
  if (static_cast<int>(y.size()) != m) throw DimensionError("solve_svm: label length != m");
  if (!(cost > 0)) throw ValidationError("solve_svm: cost must be > 0");
  if (!(tol > 0)) throw ValidationError("solve_svm: tol must be > 0");

  SvmSolution sol;
  sol.alpha.assign(m, 0.0);
  sol.w.assign(feats.primal_dim(), 0.0);

  std::vector<double> qd(m);
  for (int s = 0; s < m; ++s) {
    qd[s] = feats.norm_sq(s);
    // zero feature: the dual is linear in alpha_s with slope -1; pin at C
    if (qd[s] == 0.0) sol.alpha[s] = cost;
  }

  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);

  auto objectives = [&](double& dual, double& primal) {
    double wsq = norm_sq(sol.w);
    double asum = 0.0;
    for (int s = 0; s < m; ++s) asum += sol.alpha[s];
    dual = asum - 0.5 * wsq;
    double hinge = 0.0;
    for (int s = 0; s < m; ++s)
      hinge += std::max(0.0, 1.0 - y[s] * feats.dot_primal(sol.w, s));
    primal = 0.5 * wsq + cost * hinge;
  };

  bool converged = (m == 0);
  double target = tol;
  int epoch = 0;
  while (!converged && epoch < max_epochs) {
    rng.shuffle(perm);
    double maxv = 0.0;
    for (int s : perm) {
      if (qd[s] == 0.0) continue;
      const double grad = y[s] * feats.dot_primal(sol.w, s) - 1.0;
      double viol;
      if (sol.alpha[s] <= 0.0)
        viol = std::max(0.0, -grad);
      else if (sol.alpha[s] >= cost)
        viol = std::max(0.0, grad);
      else
        viol = std::fabs(grad);
      maxv = std::max(maxv, viol);
      const double next = std::clamp(sol.alpha[s] - grad / qd[s], 0.0, cost);
      const double delta = next - sol.alpha[s];
      if (delta != 0.0) {
        feats.add_to_primal(sol.w, delta * y[s], s);
        sol.alpha[s] = next;
      }
    }
    ++epoch;
    if (epoch % 64 == 0) {  // bound accumulator drift
      std::fill(sol.w.begin(), sol.w.end(), 0.0);
      for (int s = 0; s < m; ++s)
        if (sol.alpha[s] != 0.0 && qd[s] != 0.0)
          feats.add_to_primal(sol.w, sol.alpha[s] * y[s], s);
    }
    if (maxv <= target) {
      double dual, primal;
      objectives(dual, primal);
      if (primal - dual <= 10.0 * tol && primal - dual >= -1e-9) {
        converged = true;
      } else {
        target *= 0.5;
      }
    }
  }

  std::fill(sol.w.begin(), sol.w.end(), 0.0);
  for (int s = 0; s < m; ++s)
    if (sol.alpha[s] != 0.0 && qd[s] != 0.0) feats.add_to_primal(sol.w, sol.alpha[s] * y[s], s);
  objectives(sol.dual_obj, sol.primal_obj);
  sol.gap = sol.primal_obj - sol.dual_obj;
  sol.epochs = epoch;
  sol.converged = converged;
  return sol;
}

}  // namespace privml
