#pragma once

#include <cstdint>

#include "privml/errors.hpp"

namespace privml {

struct Hyperparams {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double cost = 1.0;
  int embed_dim = 1;       // k, 1 <= k <= min(d, L) for the factorized trainers
  int pool_size = 0;       // K; 0 means "all other labels" (resolved to L-1 at training)
  double inner_tol = 1e-6;
  double outer_tol = 1e-3;
  int max_inner_epochs = 1000;
  int max_outer_iters = 30;
  std::int64_t seed = 1;

  void validate() const {
    if (!(gamma1 > 0)) throw ValidationError("Hyperparams: gamma1 must be > 0");
    if (!(gamma2 > 0)) throw ValidationError("Hyperparams: gamma2 must be > 0");
    if (!(cost > 0)) throw ValidationError("Hyperparams: cost must be > 0");
    if (embed_dim < 1) throw ValidationError("Hyperparams: embed_dim must be >= 1");
    if (pool_size < 0) throw ValidationError("Hyperparams: pool_size must be >= 0");
    if (!(inner_tol > 0)) throw ValidationError("Hyperparams: inner_tol must be > 0");
    if (!(outer_tol > 0)) throw ValidationError("Hyperparams: outer_tol must be > 0");
    if (max_inner_epochs < 1) throw ValidationError("Hyperparams: max_inner_epochs must be >= 1");
    if (max_outer_iters < 1) throw ValidationError("Hyperparams: max_outer_iters must be >= 1");
  }

  // Dataset-dependent range checks, applied by the trainers.
  void validate_for(int d, int L, bool low_rank) const {
    validate();
    if (low_rank && embed_dim > (d < L ? d : L))
      throw ValidationError("Hyperparams: embed_dim exceeds min(d, L)");
    if (pool_size > L - 1) throw ValidationError("Hyperparams: pool_size exceeds L-1");
  }

  // K = L-1 (all other labels) unless the user pinned a pool size.
  int resolved_pool_size(int L) const { return pool_size == 0 ? L - 1 : pool_size; }
};

}  // namespace privml
