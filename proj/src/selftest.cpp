#include "privml/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "privml/data_io.hpp"
#include "privml/rng.hpp"
#include "privml/trainers.hpp"

namespace privml {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void record(SuiteResult& res, bool ok, const std::string& what) {
  if (ok) {
    ++res.passed;
  } else {
    ++res.failed;
    if (res.failures.size() < 8) res.failures.push_back(what);
  }
}

double max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double wtilde_max_abs(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs(a[i], b[i]));
  return m;
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed, int max_m, int max_dim) {
  Rng rng(seed);
  const int m = 1 + rng.bounded(max_m);
  const int fdim = 1 + rng.bounded(max_dim);
  const int pdim = 1 + rng.bounded(max_dim);
  const int blocks = 1 + rng.bounded(std::min(3, m));

  RandomInstance inst;
  Mat rows(m, fdim);
  for (int s = 0; s < m; ++s)
    for (int c = 0; c < fdim; ++c) rows(s, c) = rng.normal();
  inst.feats = std::make_unique<DenseRowFeatures>(std::move(rows));

  // Without a bias in the correcting function, arbitrary privileged vectors
  // can make the primal infeasible (conflicting slack requirements) and the
  // dual unbounded. Giving each block's vectors a strictly positive component
  // along a common random direction keeps every instance solvable.
  std::vector<std::vector<double>> axes(blocks, std::vector<double>(pdim));
  for (int b = 0; b < blocks; ++b) {
    double nrm = 0.0;
    for (int c = 0; c < pdim; ++c) {
      axes[b][c] = rng.normal();
      nrm += axes[b][c] * axes[b][c];
    }
    nrm = std::sqrt(nrm);
    for (int c = 0; c < pdim; ++c) axes[b][c] /= nrm;
  }
  std::vector<std::vector<double>> pv(m);
  std::vector<int> block_ids(m);
  for (int s = 0; s < m; ++s) {
    block_ids[s] = s % blocks;  // every block nonempty
    const std::vector<double>& u = axes[block_ids[s]];
    pv[s].resize(pdim);
    double along = 0.0;
    for (int c = 0; c < pdim; ++c) {
      pv[s][c] = rng.normal();
      along += pv[s][c] * u[c];
    }
    const double lift = 0.5 + std::fabs(rng.normal()) - along;
    for (int c = 0; c < pdim; ++c) pv[s][c] += lift * u[c];
  }
  inst.priv = std::make_unique<DensePrivSource>(std::move(pv), std::move(block_ids), blocks);

  inst.y.resize(m);
  for (int s = 0; s < m; ++s) inst.y[s] = rng.uniform() < 0.5 ? 1 : -1;
  inst.gamma = 0.1 + 1.9 * rng.uniform();
  inst.cost = 0.01 + 19.99 * rng.uniform();
  return inst;
}

double dense_dual_objective(const SvmPlusProblem& p, std::span<const double> alpha,
                            std::span<const double> beta) {
  const int m = p.size();
  Mat k_mat(m, m), kt_mat(m, m);
  for (int s = 0; s < m; ++s)
    for (int t = 0; t < m; ++t) {
      k_mat(s, t) = p.feats->dot_pair(s, t);
      kt_mat(s, t) = p.priv->dot_pair(s, t);
    }
  double quad = 0.0, lin = 0.0, priv_quad = 0.0;
  for (int s = 0; s < m; ++s) {
    lin += alpha[s];
    for (int t = 0; t < m; ++t) {
      quad += alpha[s] * p.y[s] * alpha[t] * p.y[t] * k_mat(s, t);
      priv_quad += (alpha[s] + beta[s] - p.cost) * (alpha[t] + beta[t] - p.cost) * kt_mat(s, t);
    }
  }
  return -0.5 * quad + lin - priv_quad / (2.0 * p.gamma);
}

EvalReport naive_evaluate(const Mat& scores, const LabelMatrix& truth) {
  const int L = scores.rows(), n = scores.cols();
  EvalReport rep;
  rep.n_eval = n;

  long hamming = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < L; ++i)
      if ((scores(i, j) >= 0.0 ? 1 : -1) != truth(i, j)) ++hamming;
  rep.hamming_loss = static_cast<double>(hamming) / (static_cast<double>(n) * L);

  auto rank_of = [&](int i, int j) {
    int r = 1;
    for (int p = 0; p < L; ++p) {
      if (p == i) continue;
      if (scores(p, j) > scores(i, j) || (scores(p, j) == scores(i, j) && p < i)) ++r;
    }
    return r;
  };

  long oe_cnt = 0, oe_used = 0, cov_used = 0, rl_used = 0, ap_used = 0;
  double cov_sum = 0, rl_sum = 0, ap_sum = 0;
  for (int j = 0; j < n; ++j) {
    int pos = 0, neg = 0;
    for (int i = 0; i < L; ++i) (truth(i, j) > 0 ? pos : neg)++;
    if (pos > 0) {
      ++oe_used;
      int top = 0;
      for (int i = 1; i < L; ++i)
        if (scores(i, j) > scores(top, j)) top = i;
      if (truth(top, j) < 0) ++oe_cnt;

      int worst_rank = 0;
      for (int i = 0; i < L; ++i)
        if (truth(i, j) > 0) worst_rank = std::max(worst_rank, rank_of(i, j));
      cov_sum += static_cast<double>(worst_rank - 1) / L;
      ++cov_used;

      double ap = 0.0;
      for (int i = 0; i < L; ++i) {
        if (truth(i, j) <= 0) continue;
        const int ri = rank_of(i, j);
        int better = 0;
        for (int p = 0; p < L; ++p)
          if (truth(p, j) > 0 && rank_of(p, j) <= ri) ++better;
        ap += static_cast<double>(better) / ri;
      }
      ap_sum += ap / pos;
      ++ap_used;
    }
    if (pos > 0 && neg > 0) {
      long bad = 0;
      for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
          if (truth(p, j) > 0 && truth(q, j) < 0 && scores(p, j) <= scores(q, j)) ++bad;
      rl_sum += static_cast<double>(bad) / (static_cast<double>(pos) * neg);
      ++rl_used;
    }
  }
  rep.one_error = oe_used ? static_cast<double>(oe_cnt) / oe_used : 0.0;
  rep.skipped_one_error = n - static_cast<int>(oe_used);
  rep.coverage = cov_used ? cov_sum / cov_used : 0.0;
  rep.skipped_coverage = n - static_cast<int>(cov_used);
  rep.ranking_loss = rl_used ? rl_sum / rl_used : 0.0;
  rep.skipped_ranking_loss = n - static_cast<int>(rl_used);
  rep.average_precision = ap_used ? ap_sum / ap_used : 0.0;
  rep.skipped_average_precision = n - static_cast<int>(ap_used);

  double auc_sum = 0.0;
  long auc_used = 0;
  for (int i = 0; i < L; ++i) {
    long pos = 0, neg = 0;
    for (int j = 0; j < n; ++j) (truth(i, j) > 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) continue;
    double wins = 0.0;
    for (int a = 0; a < n; ++a) {
      if (truth(i, a) <= 0) continue;
      for (int b = 0; b < n; ++b) {
        if (truth(i, b) > 0) continue;
        if (scores(i, a) > scores(i, b))
          wins += 1.0;
        else if (scores(i, a) == scores(i, b))
          wins += 0.5;
      }
    }
    auc_sum += wins / (static_cast<double>(pos) * neg);
    ++auc_used;
  }
  rep.macro_auc = auc_used ? auc_sum / auc_used : 0.0;
  rep.skipped_macro_auc = L - static_cast<int>(auc_used);
  return rep;
}

SuiteResult run_qp_suite(int instances, std::uint64_t seed, bool inject_fault) {
  SuiteResult res;
  res.name = "qp";
  const auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-8;
  for (int t = 0; t < instances; ++t) {
    const RandomInstance inst = random_instance(mix_seed(seed, t));
    const SvmPlusProblem p = inst.problem();
    DualSolution cd = solve_svmplus(p, tol, 200000, mix_seed(seed, t, 7));
    DualSolution bf = brute_force_qp(p);
    double obj_diff = std::fabs(cd.dual_obj - bf.dual_obj);
    if (inject_fault && t == 0) obj_diff += 1e-3;
    const double primal_diff = max_abs(cd.primal, bf.primal);
    const double wt_diff = wtilde_max_abs(cd.wtilde, bf.wtilde);
    record(res, cd.converged, "instance " + std::to_string(t) + ": CD did not converge");
    record(res, obj_diff <= 1e-5,
           "instance " + std::to_string(t) + ": dual objective differs by " +
               std::to_string(obj_diff));
    record(res, primal_diff <= 1e-4 && wt_diff <= 1e-4,
           "instance " + std::to_string(t) + ": recovered primal differs by " +
               std::to_string(std::max(primal_diff, wt_diff)));
    record(res, !cd.converged || (cd.gap <= 10.0 * tol && cd.gap >= -1e-9),
           "instance " + std::to_string(t) + ": duality gap " + std::to_string(cd.gap));
  }
  res.seconds = seconds_since(t0);
  return res;
}

SuiteResult run_kkt_suite(int instances, std::uint64_t seed) {
  SuiteResult res;
  res.name = "kkt";
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < instances; ++t) {
    const RandomInstance inst = random_instance(mix_seed(seed, t, 0x5e));
    const SvmPlusProblem p = inst.problem();
    const int m = p.size();

    DualState st = init_state(p);
    Rng rng(mix_seed(seed, t, 3));
    double prev_dual = detail::dual_from_state(p, st);
    bool feasible = true, ascent = true;
    for (int step = 0; step < 40 * m; ++step) {
      const int s = rng.bounded(2 * m);
      cd_step(p, st, s);
      for (double e : st.eta) feasible = feasible && e >= 0.0;
      DualState check = st;
      detail::refresh_accumulators(p, check);
      const double dual = detail::dual_from_state(p, check);
      ascent = ascent && dual >= prev_dual - 1e-12;
      prev_dual = dual;
    }
    record(res, feasible, "instance " + std::to_string(t) + ": eta left the orthant");
    record(res, ascent, "instance " + std::to_string(t) + ": dual objective decreased");

    DualState rebuilt = st;
    detail::refresh_accumulators(p, rebuilt);
    const double drift_primal = max_abs(st.primal, rebuilt.primal);
    const double drift_wt = wtilde_max_abs(st.wtilde, rebuilt.wtilde);
    record(res, drift_primal <= 1e-8 && drift_wt <= 1e-8,
           "instance " + std::to_string(t) + ": maintained accumulators drifted by " +
               std::to_string(std::max(drift_primal, drift_wt)));
  }
  res.seconds = seconds_since(t0);
  return res;
}

SuiteResult run_uniqueness_suite(int instances, std::uint64_t seed) {
  SuiteResult res;
  res.name = "uniqueness";
  const auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-8;
  for (int t = 0; t < instances; ++t) {
    // alternate per-label shaped (dense rows) and dictionary shaped
    // (rank-one) subproblems built from small synthetic datasets
    Rng rng(mix_seed(seed, t));
    const int n = 6 + rng.bounded(10);
    const int d = 3 + rng.bounded(3);
    const int L = 3 + rng.bounded(3);
    const int k = 2;
    SynthDataset sd = synth_lowrank(n, d, L, k, 0.4, 0.1, mix_seed(seed, t, 1));
    // Two always-positive labels keep a constant +1 coordinate in every
    // pool, so each subproblem admits a feasible correcting vector (the
    // uniqueness statement presumes solvable subproblems; without a bias in
    // the correcting function, arbitrary label patterns can conflict).
    for (int j = 0; j < n; ++j) {
      sd.data.labels.set(0, j, 1);
      sd.data.labels.set(1, j, 1);
    }
    const PrivilegedSet pools = build_label_pools(sd.data.labels, L - 1);
    Hyperparams hp;
    hp.gamma1 = 0.5 + rng.uniform();
    hp.gamma2 = 0.5 + rng.uniform();
    hp.cost = 0.5 + 2.0 * rng.uniform();
    hp.embed_dim = k;
    hp.inner_tol = tol;
    hp.max_inner_epochs = 1000000;

    if (t % 2 == 0) {
      const Mat d_mat = init_dictionary(k, sd.data.d, mix_seed(seed, t, 2));
      hp.seed = 101;
      const WStepResult a = w_step(d_mat, sd.data, pools, hp);
      hp.seed = 707;
      const WStepResult b = w_step(d_mat, sd.data, pools, hp);
      const double dw = max_abs(a.w_mat.flat(), b.w_mat.flat());
      const double dt = wtilde_max_abs(a.w_tilde, b.w_tilde);
      record(res, a.converged && b.converged,
             "w-step instance " + std::to_string(t) + ": solver did not converge");
      record(res, dw <= 1e-4 && dt <= 1e-4,
             "w-step instance " + std::to_string(t) + ": seeds disagree by " +
                 std::to_string(std::max(dw, dt)));
    } else {
      Mat w_mat(k, L);
      for (int r = 0; r < k; ++r)
        for (int i = 0; i < L; ++i) w_mat(r, i) = rng.normal();
      hp.seed = 101;
      const DStepResult a = d_step(w_mat, sd.data, pools, hp);
      hp.seed = 707;
      const DStepResult b = d_step(w_mat, sd.data, pools, hp);
      const double dd = max_abs(a.d_mat.flat(), b.d_mat.flat());
      const double dt = wtilde_max_abs(a.w_tilde, b.w_tilde);
      record(res, a.converged && b.converged,
             "d-step instance " + std::to_string(t) + ": solver did not converge");
      record(res, dd <= 1e-4 && dt <= 1e-4,
             "d-step instance " + std::to_string(t) + ": seeds disagree by " +
                 std::to_string(std::max(dd, dt)));
    }
  }
  res.seconds = seconds_since(t0);
  return res;
}

SuiteResult run_metrics_suite(int instances, std::uint64_t seed) {
  SuiteResult res;
  res.name = "metrics";
  const auto t0 = std::chrono::steady_clock::now();

  // pinned hand-worked example
  {
    Mat scores(3, 2);
    LabelMatrix truth(3, 2);
    scores(0, 0) = 2.0;
    scores(1, 0) = -1.0;
    scores(2, 0) = -3.0;
    truth.set(0, 0, 1);
    truth.set(1, 0, -1);
    truth.set(2, 0, -1);
    scores(0, 1) = 0.5;
    scores(1, 1) = 1.5;
    scores(2, 1) = -0.2;
    truth.set(0, 1, -1);
    truth.set(1, 1, 1);
    truth.set(2, 1, 1);
    const EvalReport rep = evaluate(scores, truth);
    record(res, rep.hamming_loss == 1.0 / 3.0, "hand case: hamming loss");
    record(res, rep.one_error == 0.0, "hand case: one-error");
    record(res, rep.coverage == 1.0 / 3.0, "hand case: coverage");
    record(res, rep.ranking_loss == 1.0 / 4.0, "hand case: ranking loss");
    record(res, rep.average_precision == 11.0 / 12.0, "hand case: average precision");
    record(res, rep.macro_auc == 1.0, "hand case: macro AUC");
  }

  for (int t = 0; t < instances; ++t) {
    Rng rng(mix_seed(seed, t));
    const int L = 1 + rng.bounded(6);
    const int n = 1 + rng.bounded(8);
    Mat scores(L, n);
    LabelMatrix truth(L, n);
    const bool discrete = rng.uniform() < 0.5;  // force score ties half the time
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < n; ++j) {
        scores(i, j) = discrete ? (rng.bounded(5) - 2) * 0.5 : 2.0 * rng.uniform() - 1.0;
        truth.set(i, j, rng.uniform() < 0.4 ? 1 : -1);
      }
    const EvalReport a = evaluate(scores, truth);
    const EvalReport b = naive_evaluate(scores, truth);
    const bool equal = a.hamming_loss == b.hamming_loss && a.one_error == b.one_error &&
                       a.coverage == b.coverage && a.ranking_loss == b.ranking_loss &&
                       a.average_precision == b.average_precision &&
                       a.macro_auc == b.macro_auc &&
                       a.skipped_one_error == b.skipped_one_error &&
                       a.skipped_macro_auc == b.skipped_macro_auc;
    record(res, equal, "instance " + std::to_string(t) + ": metric mismatch vs enumeration");
    bool in_range = true;
    for (const auto& [name, v] : a.metric_values()) in_range = in_range && v >= 0.0 && v <= 1.0;
    record(res, in_range, "instance " + std::to_string(t) + ": metric out of [0,1]");
  }
  res.seconds = seconds_since(t0);
  return res;
}

}  // namespace privml
