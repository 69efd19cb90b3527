#include "privml/svmplus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "privml/rng.hpp"

namespace privml {

void SvmPlusProblem::validate() const {
  if (!feats || !priv) throw ValidationError("SvmPlusProblem: missing feature or priv source");
  const int m = feats->size();
  if (priv->size() != m) throw DimensionError("SvmPlusProblem: priv size != feature size");
  if (static_cast<int>(y.size()) != m) throw DimensionError("SvmPlusProblem: label size != m");
  for (std::int8_t v : y)
    if (v != 1 && v != -1) throw ValidationError("SvmPlusProblem: labels must be +/-1");
  if (!(gamma > 0)) throw ValidationError("SvmPlusProblem: gamma must be > 0");
  if (!(cost > 0)) throw ValidationError("SvmPlusProblem: cost must be > 0");
}

DualState init_state(const SvmPlusProblem& p) {
  const int m = p.size();
  DualState st;
  st.eta.assign(2 * static_cast<std::size_t>(m), 0.0);
  st.primal.assign(p.feats->primal_dim(), 0.0);
  st.wtilde.resize(p.priv->num_blocks());
  for (int b = 0; b < p.priv->num_blocks(); ++b) st.wtilde[b].assign(p.priv->block_dim(b), 0.0);
  const double c0 = -p.cost / p.gamma;
  for (int s = 0; s < m; ++s) p.priv->add(st.wtilde[p.priv->block_of(s)], c0, s);
  st.q.resize(2 * static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) {
    const double pn = p.priv->norm_sq(s) / p.gamma;
    st.q[s] = p.feats->norm_sq(s) + pn;
    st.q[m + s] = pn;
  }
  return st;
}

double cd_step(const SvmPlusProblem& p, DualState& st, int s) {
  const int m = p.size();
  if (s < 0 || s >= 2 * m) throw DimensionError("cd_step: coordinate out of range");
  if (st.q[s] == 0.0) return 0.0;
  const bool is_alpha = s < m;
  const int idx = is_alpha ? s : s - m;
  const int b = p.priv->block_of(idx);

  double grad;
  if (is_alpha) {
    grad = p.y[idx] * p.feats->dot_primal(st.primal, idx) - 1.0 +
           p.priv->dot(st.wtilde[b], idx);
  } else {
    grad = p.priv->dot(st.wtilde[b], idx);
  }

  const double viol = std::fabs(std::min(st.eta[s], grad));
  const double delta = std::max(-st.eta[s], -grad / st.q[s]);
  if (delta != 0.0) {
    if (is_alpha) p.feats->add_to_primal(st.primal, delta * p.y[idx], idx);
    p.priv->add(st.wtilde[b], delta / p.gamma, idx);
    st.eta[s] += delta;
  }
  return viol;
}

namespace {

// Exact minimization over the (alpha_s, beta_s) pair. The two coordinates
// share priv(s), so their 2x2 Hessian [[A,P],[P,P]] is near-singular whenever
// |feat(s)|^2 is small and one-at-a-time steps zigzag; the joint step removes
// that stall. Same feasible set, still monotone ascent.
void pair_step(const SvmPlusProblem& p, DualState& st, int idx) {
  const int m = p.size();
  const double a_diag = st.q[idx];      // |feat|^2 + |priv|^2/gamma
  const double p_diag = st.q[m + idx];  // |priv|^2/gamma
  if (a_diag == 0.0) return;            // pinned
  const int b = p.priv->block_of(idx);
  const double slack = p.priv->dot(st.wtilde[b], idx);
  const double ga = p.y[idx] * p.feats->dot_primal(st.primal, idx) - 1.0 + slack;
  const double gb = slack;
  const double alpha = st.eta[idx], beta = st.eta[m + idx];

  double best_da = 0.0, best_db = 0.0;
  bool have = false;
  double best_obj = 0.0;
  auto consider = [&](double da, double db) {
    const double obj =
        ga * da + gb * db + 0.5 * (a_diag * da * da + 2.0 * p_diag * da * db + p_diag * db * db);
    if (!have || obj < best_obj) {
      have = true;
      best_obj = obj;
      best_da = da;
      best_db = db;
    }
  };

  if (p_diag == 0.0) {
    // beta coordinate is null; plain alpha step
    consider(std::max(-alpha, -ga / a_diag), 0.0);
  } else {
    if (a_diag > p_diag) {  // nonsingular pair
      const double da = (gb - ga) / (a_diag - p_diag);
      const double db = -gb / p_diag - da;
      if (alpha + da >= 0.0 && beta + db >= 0.0) consider(da, db);
    }
    {  // alpha pinned at zero
      const double da = -alpha;
      consider(da, std::max(-beta, -(gb + p_diag * da) / p_diag));
    }
    {  // beta pinned at zero
      const double db = -beta;
      consider(std::max(-alpha, -(ga + p_diag * db) / a_diag), db);
    }
    consider(-alpha, -beta);
  }

  if (!have || best_obj >= 0.0) return;  // no descent
  if (best_da != 0.0) p.feats->add_to_primal(st.primal, best_da * p.y[idx], idx);
  const double dsum = best_da + best_db;
  if (dsum != 0.0) p.priv->add(st.wtilde[b], dsum / p.gamma, idx);
  st.eta[idx] = std::max(0.0, alpha + best_da);
  st.eta[m + idx] = std::max(0.0, beta + best_db);
}

}  // namespace

namespace detail {

void refresh_accumulators(const SvmPlusProblem& p, DualState& st) {
  const int m = p.size();
  std::fill(st.primal.begin(), st.primal.end(), 0.0);
  for (auto& wt : st.wtilde) std::fill(wt.begin(), wt.end(), 0.0);
  for (int s = 0; s < m; ++s) {
    if (st.q[s] != 0.0 && st.eta[s] != 0.0)
      p.feats->add_to_primal(st.primal, st.eta[s] * p.y[s], s);
    const double coef = (st.eta[s] + st.eta[m + s] - p.cost) / p.gamma;
    p.priv->add(st.wtilde[p.priv->block_of(s)], coef, s);
  }
}

double dual_from_state(const SvmPlusProblem& p, const DualState& st) {
  const int m = p.size();
  double obj = -0.5 * norm_sq(st.primal);
  for (int s = 0; s < m; ++s) obj += st.eta[s];
  double wt_sq = 0.0;
  for (const auto& wt : st.wtilde) wt_sq += norm_sq(wt);
  return obj - 0.5 * p.gamma * wt_sq;
}

double primal_from_state(const SvmPlusProblem& p, const DualState& st) {
  const int m = p.size();
  double wt_sq = 0.0;
  for (const auto& wt : st.wtilde) wt_sq += norm_sq(wt);
  double slack = 0.0;
  for (int s = 0; s < m; ++s) slack += p.priv->dot(st.wtilde[p.priv->block_of(s)], s);
  return 0.5 * norm_sq(st.primal) + 0.5 * p.gamma * wt_sq + p.cost * slack;
}

}  // namespace detail

DualSolution solve_svmplus(const SvmPlusProblem& p, double tol, int max_epochs,
                           std::uint64_t seed, const TraceSink& sink) {
  p.validate();
  if (!(tol > 0)) throw ValidationError("solve_svmplus: tol must be > 0");
  const int m = p.size();

  DualState st = init_state(p);
  int skipped = 0;
  for (int s = 0; s < m; ++s) skipped += (st.q[s] == 0.0);

  std::vector<int> perm(2 * static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);

  bool converged = (m == 0);
  double target = tol;
  while (!converged && st.epoch < max_epochs) {
    rng.shuffle(perm);
    double maxv = 0.0;
    for (int s : perm) maxv = std::max(maxv, cd_step(p, st, s));
    for (int s = 0; s < m; ++s) pair_step(p, st, s);
    ++st.epoch;
    st.max_violation = maxv;
    if (st.epoch % 64 == 0) detail::refresh_accumulators(p, st);
    if (sink) sink(st.epoch, maxv, detail::dual_from_state(p, st));
    if (maxv <= target) {
      detail::refresh_accumulators(p, st);
      const double gap = detail::primal_from_state(p, st) - detail::dual_from_state(p, st);
      if ((gap <= 10.0 * tol && gap >= -1e-9) || skipped > 0) {
        converged = true;
      } else {
        target *= 0.5;  // KKT residuals cleared but the gap certificate has not
      }
    }
  }

  detail::refresh_accumulators(p, st);
  DualSolution sol;
  sol.alpha.assign(st.eta.begin(), st.eta.begin() + m);
  sol.beta.assign(st.eta.begin() + m, st.eta.end());
  sol.primal = st.primal;
  sol.wtilde = st.wtilde;
  sol.dual_obj = detail::dual_from_state(p, st);
  sol.primal_obj = detail::primal_from_state(p, st);
  sol.gap = sol.primal_obj - sol.dual_obj;
  sol.epochs = st.epoch;
  sol.converged = converged;
  sol.skipped = skipped;
  return sol;
}

double dual_objective(const SvmPlusProblem& p, std::span<const double> alpha,
                      std::span<const double> beta) {
  const int m = p.size();
  if (static_cast<int>(alpha.size()) != m || static_cast<int>(beta.size()) != m)
    throw DimensionError("dual_objective: multiplier length != m");

  std::vector<double> primal(p.feats->primal_dim(), 0.0);
  std::vector<std::vector<double>> wtilde(p.priv->num_blocks());
  for (int b = 0; b < p.priv->num_blocks(); ++b) wtilde[b].assign(p.priv->block_dim(b), 0.0);
  double obj = 0.0;
  for (int s = 0; s < m; ++s) {
    if (alpha[s] != 0.0) p.feats->add_to_primal(primal, alpha[s] * p.y[s], s);
    p.priv->add(wtilde[p.priv->block_of(s)], (alpha[s] + beta[s] - p.cost) / p.gamma, s);
    obj += alpha[s];
  }
  obj -= 0.5 * norm_sq(primal);
  double wt_sq = 0.0;
  for (const auto& wt : wtilde) wt_sq += norm_sq(wt);
  return obj - 0.5 * p.gamma * wt_sq;
}

double primal_objective(const SvmPlusProblem& p, std::span<const double> primal,
                        const std::vector<std::vector<double>>& wtilde) {
  const int m = p.size();
  if (static_cast<int>(primal.size()) != p.feats->primal_dim())
    throw DimensionError("primal_objective: primal length mismatch");
  if (static_cast<int>(wtilde.size()) != p.priv->num_blocks())
    throw DimensionError("primal_objective: wtilde block count mismatch");

  double worst = 0.0;
  double slack_sum = 0.0;
  for (int s = 0; s < m; ++s) {
    const double slack = p.priv->dot(wtilde[p.priv->block_of(s)], s);
    const double margin = p.y[s] * p.feats->dot_primal(primal, s);
    worst = std::max(worst, 1.0 - slack - margin);  // hinge constraint
    worst = std::max(worst, -slack);                // nonnegative correcting value
    slack_sum += slack;
  }
  if (worst > 1e-6)
    throw InfeasibleError("primal_objective: recovered point violates constraints", worst);

  double wt_sq = 0.0;
  for (const auto& wt : wtilde) wt_sq += norm_sq(wt);
  return 0.5 * norm_sq(primal) + 0.5 * p.gamma * wt_sq + p.cost * slack_sum;
}

// ---------------------------------------------------------------------------
// Brute-force oracle: minimize 1/2 eta^T H eta + q^T eta over eta >= 0 with
// the dense Hessian assembled from kernel entries, FISTA with monotone
// restart, projected-gradient certificate at 1e-8.

DualSolution brute_force_qp(const SvmPlusProblem& p) {
  p.validate();
  const int m = p.size();
  if (m > 10) throw ValidationError("brute_force_qp: size guard (m <= 10) violated");

  DualSolution sol;
  if (m == 0) {
    sol.primal.assign(p.feats->primal_dim(), 0.0);
    sol.wtilde.resize(p.priv->num_blocks());
    for (int b = 0; b < p.priv->num_blocks(); ++b) sol.wtilde[b].assign(p.priv->block_dim(b), 0.0);
    sol.converged = true;
    return sol;
  }

  const int dim = 2 * m;
  Mat h(dim, dim);
  std::vector<double> q(dim);
  for (int s = 0; s < m; ++s) {
    for (int t = 0; t < m; ++t) {
      const double kt = p.priv->dot_pair(s, t) / p.gamma;
      h(s, t) = p.y[s] * p.y[t] * p.feats->dot_pair(s, t) + kt;
      h(s, m + t) = kt;
      h(m + s, t) = kt;
      h(m + s, m + t) = kt;
    }
  }
  for (int s = 0; s < m; ++s) {
    double kt_row = 0.0;
    for (int t = 0; t < m; ++t) kt_row += p.priv->dot_pair(s, t);
    q[s] = -1.0 - (p.cost / p.gamma) * kt_row;
    q[m + s] = -(p.cost / p.gamma) * kt_row;
  }

  // Coordinates with a zero diagonal cannot move (alpha: infeasible margin
  // constraint, pinned; beta: null direction).
  std::vector<bool> pinned(dim, false);
  for (int i = 0; i < dim; ++i) pinned[i] = (h(i, i) == 0.0);

  double lip = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    for (int j = 0; j < dim; ++j) row += std::fabs(h(i, j));
    lip = std::max(lip, row);
  }
  if (lip == 0.0) lip = 1.0;
  const double step = 1.0 / lip;

  std::vector<double> x(dim, 0.0), y_acc(dim, 0.0), x_prev(dim, 0.0), grad(dim, 0.0);
  auto gradient_at = [&](const std::vector<double>& v, std::vector<double>& g) {
    for (int i = 0; i < dim; ++i) {
      double acc = q[i];
      const double* hrow = h.row(i).data();
      for (int j = 0; j < dim; ++j) acc += hrow[j] * v[j];
      g[i] = acc;
    }
  };
  auto certificate = [&](const std::vector<double>& v) {
    gradient_at(v, grad);
    double worst = 0.0;
    for (int i = 0; i < dim; ++i) {
      if (pinned[i]) continue;
      const double pg = v[i] > 0.0 ? grad[i] : std::min(grad[i], 0.0);
      worst = std::max(worst, std::fabs(pg));
    }
    return worst;
  };

  // The multipliers are non-unique in general (H is singular off the primal
  // subspace), so accelerated projected gradient alone creeps along flat
  // faces. Once the active face settles, an exact CG solve on the free
  // coordinates lands on a minimizer; the certificate stays the arbiter.
  auto try_polish = [&]() -> bool {
    std::vector<int> free_set;
    for (int i = 0; i < dim; ++i)
      if (!pinned[i] && x[i] > 1e-9) free_set.push_back(i);
    const int nf = static_cast<int>(free_set.size());
    std::vector<double> z(nf), r(nf), d(nf), hd(nf);
    for (int a = 0; a < nf; ++a) z[a] = x[free_set[a]];
    auto mult = [&](const std::vector<double>& v, std::vector<double>& out) {
      for (int a = 0; a < nf; ++a) {
        double acc = 0.0;
        for (int b = 0; b < nf; ++b) acc += h(free_set[a], free_set[b]) * v[b];
        out[a] = acc;
      }
    };
    mult(z, r);
    for (int a = 0; a < nf; ++a) r[a] = -q[free_set[a]] - r[a];
    d = r;
    double rr = 0.0;
    for (int a = 0; a < nf; ++a) rr += r[a] * r[a];
    for (int cg = 0; cg < 8 * nf + 8 && rr > 1e-26; ++cg) {
      mult(d, hd);
      double dhd = 0.0;
      for (int a = 0; a < nf; ++a) dhd += d[a] * hd[a];
      if (dhd <= 0.0) break;  // flat or inconsistent face
      const double alpha_cg = rr / dhd;
      for (int a = 0; a < nf; ++a) {
        z[a] += alpha_cg * d[a];
        r[a] -= alpha_cg * hd[a];
      }
      double rr_next = 0.0;
      for (int a = 0; a < nf; ++a) rr_next += r[a] * r[a];
      for (int a = 0; a < nf; ++a) d[a] = r[a] + (rr_next / rr) * d[a];
      rr = rr_next;
    }
    std::vector<double> cand(dim, 0.0);
    for (int a = 0; a < nf; ++a) {
      if (z[a] < -1e-10) return false;  // wrong face
      cand[free_set[a]] = std::max(0.0, z[a]);
    }
    if (certificate(cand) > 1e-8) return false;
    x = cand;
    return true;
  };

  const int max_iters = 500'000;
  double t_momentum = 1.0;
  bool certified = false;
  for (int it = 0; it < max_iters; ++it) {
    gradient_at(y_acc, grad);
    x_prev = x;
    for (int i = 0; i < dim; ++i)
      x[i] = pinned[i] ? 0.0 : std::max(0.0, y_acc[i] - step * grad[i]);
    // restart momentum when it points against the step
    double along = 0.0;
    for (int i = 0; i < dim; ++i) along += (y_acc[i] - x[i]) * (x[i] - x_prev[i]);
    double t_next;
    if (along > 0.0) {
      t_next = 1.0;
      y_acc = x;
    } else {
      t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      const double mom = (t_momentum - 1.0) / t_next;
      for (int i = 0; i < dim; ++i) y_acc[i] = x[i] + mom * (x[i] - x_prev[i]);
    }
    t_momentum = t_next;
    if (it % 8 == 7 && certificate(x) <= 1e-8) {
      certified = true;
      break;
    }
    if (it % 64 == 63 && try_polish()) {
      certified = true;
      break;
    }
  }
  if (!certified && certificate(x) > 1e-8)
    throw Error("brute_force_qp: projected-gradient certificate not reached");

  sol.alpha.assign(x.begin(), x.begin() + m);
  sol.beta.assign(x.begin() + m, x.end());
  sol.primal.assign(p.feats->primal_dim(), 0.0);
  sol.wtilde.resize(p.priv->num_blocks());
  for (int b = 0; b < p.priv->num_blocks(); ++b) sol.wtilde[b].assign(p.priv->block_dim(b), 0.0);
  for (int s = 0; s < m; ++s) {
    if (sol.alpha[s] != 0.0) p.feats->add_to_primal(sol.primal, sol.alpha[s] * p.y[s], s);
    p.priv->add(sol.wtilde[p.priv->block_of(s)],
                (sol.alpha[s] + sol.beta[s] - p.cost) / p.gamma, s);
  }
  sol.dual_obj = dual_objective(p, sol.alpha, sol.beta);
  double wt_sq = 0.0;
  for (const auto& wt : sol.wtilde) wt_sq += norm_sq(wt);
  double slack_sum = 0.0;
  for (int s = 0; s < m; ++s) slack_sum += p.priv->dot(sol.wtilde[p.priv->block_of(s)], s);
  sol.primal_obj = 0.5 * norm_sq(sol.primal) + 0.5 * p.gamma * wt_sq + p.cost * slack_sum;
  sol.gap = sol.primal_obj - sol.dual_obj;
  sol.converged = true;
  for (int s = 0; s < m; ++s) sol.skipped += pinned[s];
  return sol;
}

}  // namespace privml
