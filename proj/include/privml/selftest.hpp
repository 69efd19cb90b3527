#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "privml/metrics.hpp"
#include "privml/svmplus.hpp"

namespace privml {

struct SuiteResult {
  std::string name;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;  // first few messages
  double seconds = 0;

  bool ok() const { return failed == 0; }
};

// Owning random SVM+ instance; problem() views into the owned storage.
struct RandomInstance {
  std::unique_ptr<DenseRowFeatures> feats;
  std::unique_ptr<DensePrivSource> priv;
  std::vector<std::int8_t> y;
  double gamma = 1.0;
  double cost = 1.0;

  SvmPlusProblem problem() const {
    SvmPlusProblem p;
    p.feats = feats.get();
    p.priv = priv.get();
    p.y = y;
    p.gamma = gamma;
    p.cost = cost;
    return p;
  }
};

// m <= max_m constraints split into 1..3 privileged blocks, Gaussian feature
// and privileged vectors of dims <= max_dim, gamma in [0.1, 2], C in
// [0.01, 20].
RandomInstance random_instance(std::uint64_t seed, int max_m = 8, int max_dim = 4);

// Dense-kernel evaluation of the dual objective; materializes K and K~ and
// computes the quadratic form directly.
double dense_dual_objective(const SvmPlusProblem& p, std::span<const double> alpha,
                            std::span<const double> beta);

// Exhaustive re-implementation of all six metrics (explicit rank counting and
// pair enumeration); independent of metrics.cpp.
EvalReport naive_evaluate(const Mat& scores, const LabelMatrix& truth);

// CD solves match the brute-force QP oracle (dual objective within 1e-5,
// recovered primal and correcting vectors within 1e-4 max-norm) and every
// converged solve satisfies the duality-gap certificate. inject_fault biases
// one comparison; used as the negative control.
SuiteResult run_qp_suite(int instances = 100, std::uint64_t seed = 42,
                         bool inject_fault = false);

// Multiplier feasibility, per-step dual ascent, and the maintained-vs-rebuilt
// accumulator identity along randomized sweeps.
SuiteResult run_kkt_suite(int instances = 50, std::uint64_t seed = 43);

// Two seeds at tol 1e-8 recover the same primal and correcting vectors
// (max-norm 1e-4) on per-label and dictionary shaped subproblems.
SuiteResult run_uniqueness_suite(int instances = 20, std::uint64_t seed = 44);

// evaluate() agrees exactly with the exhaustive enumeration on random
// instances plus the pinned hand-worked example.
SuiteResult run_metrics_suite(int instances = 200, std::uint64_t seed = 45);

}  // namespace privml
