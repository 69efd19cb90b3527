#pragma once

#include <cstdint>
#include <vector>

#include "privml/features.hpp"

namespace privml {

struct SvmSolution {
  std::vector<double> alpha;
  std::vector<double> w;  // flattened primal, layout owned by the FeatureSet
  double dual_obj = 0.0;
  double primal_obj = 0.0;
  double gap = 0.0;
  int epochs = 0;
  bool converged = false;
};

// Plain absorbed-bias L1-hinge SVM dual:
//
//   min_{0 <= a <= C}  1/2 (a o y)^T K (a o y) - 1^T a,    w = sum a_s y_s feat(s)
//
// solved by projected dual coordinate descent over seeded per-epoch
// permutations, stopping on the projected-gradient criterion plus the duality
// gap certificate (gap <= 10 tol).
SvmSolution solve_svm(const FeatureSet& feats, std::span<const std::int8_t> y, double cost,
                      double tol, int max_epochs, std::uint64_t seed);

}  // namespace privml
