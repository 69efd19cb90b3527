#include "privml/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "privml/parallel.hpp"
#include "privml/priv_source.hpp"
#include "privml/rng.hpp"
#include "privml/svm.hpp"
#include "privml/svmplus.hpp"

namespace privml {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Projected inputs D x_j as dense rows, shared by all labels of a W-step.
Mat project_features(const Mat& d_mat, const Dataset& data) {
  const int k = d_mat.rows();
  Mat proj(data.n, k);
  for (int j = 0; j < data.n; ++j) {
    const SparseVec& x = data.features[j];
    std::span<double> row = proj.row(j);
    for (std::size_t t = 0; t < x.indices.size(); ++t) {
      const double v = x.values[t];
      const std::int32_t c = x.indices[t];
      for (int r = 0; r < k; ++r) row[r] += v * d_mat(r, c);
    }
  }
  return proj;
}

std::vector<std::int8_t> label_row(const LabelMatrix& y, int i) {
  return std::vector<std::int8_t>(y.row(i), y.row(i) + y.num_examples());
}

std::vector<std::int8_t> label_vec(const LabelMatrix& y) {
  std::vector<std::int8_t> out;
  out.reserve(static_cast<std::size_t>(y.num_labels()) * y.num_examples());
  for (int i = 0; i < y.num_labels(); ++i)
    out.insert(out.end(), y.row(i), y.row(i) + y.num_examples());
  return out;
}

PrivilegedSet empty_pools(int L) {
  PrivilegedSet ps;
  ps.pools.assign(L, {});
  return ps;
}

double frob_diff(const std::vector<std::vector<double>>& a,
                 const std::vector<std::vector<double>>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t t = 0; t < a[i].size(); ++t) {
      const double d = a[i][t] - (b.empty() ? 0.0 : b[i][t]);
      s += d * d;
    }
  return std::sqrt(s);
}

double frob_total(const std::vector<std::vector<double>>& a) {
  double s = 0.0;
  for (const auto& v : a)
    for (double x : v) s += x * x;
  return std::sqrt(s);
}

double frob_mat_diff(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      const double d = a(r, c) - b(r, c);
      s += d * d;
    }
  return std::sqrt(s);
}

}  // namespace

int PhiIndex::phi(int i, int j) const {
  if (i < 1 || i > L || j < 1 || j > n)
    throw DimensionError("phi: index [" + std::to_string(i) + "," + std::to_string(j) +
                         "] out of range");
  return (i - 1) * n + j;
}

std::pair<int, int> PhiIndex::phi_inv(int s) const {
  if (s < 1 || s > L * n) throw DimensionError("phi_inv: index out of range");
  const int i = (s - 1) / n + 1;
  const int j = s - (i - 1) * n;
  return {i, j};
}

Mat init_dictionary(int k, int d, std::uint64_t seed) {
  Rng rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
  Mat m(k, d);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = stddev * rng.normal();
  return m;
}

WStepResult w_step(const Mat& d_mat, const Dataset& data, const PrivilegedSet& pools,
                   const Hyperparams& hp, double tol_override, std::uint64_t seed_tag) {
  data.validate();
  pools.validate(data.L);
  const int k = d_mat.rows(), L = data.L;
  if (d_mat.cols() != data.d) throw DimensionError("w_step: dictionary dim != data dim");
  for (double v : d_mat.flat())
    if (!std::isfinite(v)) throw ValidationError("w_step: non-finite dictionary");

  const double tol = tol_override > 0 ? tol_override : hp.inner_tol;
  const DenseRowFeatures feats(project_features(d_mat, data));

  WStepResult res;
  res.w_mat = Mat(k, L);
  res.w_tilde.resize(L);
  std::vector<long> epochs(L, 0);
  std::vector<char> ok(L, 1);

  parallel_for(L, worker_count(), [&](int i) {
    PooledPrivSource priv(&data.labels, &pools, i);
    SvmPlusProblem prob;
    prob.feats = &feats;
    prob.priv = &priv;
    prob.y = label_row(data.labels, i);
    prob.gamma = hp.gamma2 / hp.gamma1;
    prob.cost = hp.cost / hp.gamma1;
    DualSolution sol = solve_svmplus(prob, tol, hp.max_inner_epochs,
                                     mix_seed(hp.seed, seed_tag, 1000 + i));
    for (int r = 0; r < k; ++r) res.w_mat(r, i) = sol.primal[r];
    res.w_tilde[i] = std::move(sol.wtilde[0]);
    epochs[i] = sol.epochs;
    ok[i] = sol.converged ? 1 : 0;
  });

  for (int i = 0; i < L; ++i) res.epochs += epochs[i];
  res.converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  return res;
}

DStepResult d_step(const Mat& w_mat, const Dataset& data, const PrivilegedSet& pools,
                   const Hyperparams& hp, double tol_override, std::uint64_t seed_tag) {
  data.validate();
  pools.validate(data.L);
  if (w_mat.cols() != data.L) throw DimensionError("d_step: W column count != L");
  for (double v : w_mat.flat())
    if (!std::isfinite(v)) throw ValidationError("d_step: non-finite coefficients");

  const double tol = tol_override > 0 ? tol_override : hp.inner_tol;
  RankOneFeatures feats(&w_mat, &data.features, data.d);
  PooledPrivSource priv(&data.labels, &pools);
  SvmPlusProblem prob;
  prob.feats = &feats;
  prob.priv = &priv;
  prob.y = label_vec(data.labels);
  prob.gamma = hp.gamma2;
  prob.cost = hp.cost;

  DualSolution sol =
      solve_svmplus(prob, tol, hp.max_inner_epochs, mix_seed(hp.seed, seed_tag, 2));

  DStepResult res;
  res.d_mat = feats.unpack_dictionary(sol.primal);
  res.w_tilde = std::move(sol.wtilde);
  res.converged = sol.converged;
  res.epochs = sol.epochs;
  return res;
}

double prml_objective(const Model& m, const Dataset& data, const PrivilegedSet& pools,
                      const Hyperparams& hp) {
  double worst = 0.0;
  const double obj =
      detail::prml_objective_raw(m.d_mat, m.w_mat, m.w_tilde, data, pools, hp, &worst);
  if (worst > 1e-6)
    throw InfeasibleError("prml_objective: model violates constraints", worst);
  return obj;
}

namespace detail {

double prml_objective_raw(const Mat& d_mat, const Mat& w_mat,
                          const std::vector<std::vector<double>>& w_tilde, const Dataset& data,
                          const PrivilegedSet& pools, const Hyperparams& hp, double* worst_out) {
  const int k = d_mat.rows(), L = data.L;
  double obj = 0.5 * d_mat.frob_norm_sq();
  for (int i = 0; i < L; ++i) {
    double w_sq = 0.0;
    for (int r = 0; r < k; ++r) w_sq += w_mat(r, i) * w_mat(r, i);
    obj += 0.5 * (hp.gamma1 * w_sq + hp.gamma2 * norm_sq(w_tilde[i]));
  }

  double worst = 0.0;
  double slack_sum = 0.0;
  std::vector<double> proj(k);
  for (int j = 0; j < data.n; ++j) {
    const SparseVec& x = data.features[j];
    std::fill(proj.begin(), proj.end(), 0.0);
    for (std::size_t t = 0; t < x.indices.size(); ++t)
      for (int r = 0; r < k; ++r) proj[r] += x.values[t] * d_mat(r, x.indices[t]);
    for (int i = 0; i < L; ++i) {
      double margin = 0.0;
      for (int r = 0; r < k; ++r) margin += w_mat(r, i) * proj[r];
      margin *= data.labels(i, j);
      double slack = 0.0;
      const auto& pool = pools.pool(i);
      for (std::size_t t = 0; t < pool.size(); ++t)
        slack += w_tilde[i][t] * data.labels(pool[t], j);
      worst = std::max(worst, 1.0 - slack - margin);
      worst = std::max(worst, -slack);
      slack_sum += slack;
    }
  }
  obj += hp.cost * slack_sum;
  if (worst_out) *worst_out = worst;
  return obj;
}

double lowrank_objective(const Mat& d_mat, const Mat& w_mat, const Dataset& data, double cost) {
  const int k = d_mat.rows(), L = data.L;
  double obj = 0.5 * d_mat.frob_norm_sq();
  for (int i = 0; i < L; ++i) {
    double w_sq = 0.0;
    for (int r = 0; r < k; ++r) w_sq += w_mat(r, i) * w_mat(r, i);
    obj += 0.5 * w_sq;
  }
  std::vector<double> proj(k);
  double hinge = 0.0;
  for (int j = 0; j < data.n; ++j) {
    const SparseVec& x = data.features[j];
    std::fill(proj.begin(), proj.end(), 0.0);
    for (std::size_t t = 0; t < x.indices.size(); ++t)
      for (int r = 0; r < k; ++r) proj[r] += x.values[t] * d_mat(r, x.indices[t]);
    for (int i = 0; i < L; ++i) {
      double margin = 0.0;
      for (int r = 0; r < k; ++r) margin += w_mat(r, i) * proj[r];
      hinge += std::max(0.0, 1.0 - data.labels(i, j) * margin);
    }
  }
  return obj + cost * hinge;
}

}  // namespace detail

TrainResult train_prml(const Dataset& data, const Hyperparams& hp,
                       const std::atomic<bool>* cancel) {
  data.validate();
  hp.validate_for(data.d, data.L, /*low_rank=*/true);
  const auto t0 = std::chrono::steady_clock::now();
  const int L = data.L;
  const int pool_k = data.L == 1 ? 0 : hp.resolved_pool_size(L);

  const PrivilegedSet pools = build_label_pools(data.labels, pool_k);
  Mat d_mat = init_dictionary(hp.embed_dim, data.d, mix_seed(hp.seed, 0xD1C7));
  Mat w_mat;
  std::vector<std::vector<double>> w_tilde;
  std::vector<std::vector<double>> prev_w_tilde;
  Mat prev_w_mat;

  // W~ is the convergence barometer; with empty pools it is identically zero,
  // so fall back to the coefficient matrix.
  bool wt_barometer = false;
  for (int i = 0; i < L; ++i) wt_barometer = wt_barometer || pools.priv_dim(i) > 0;

  TrainTrace trace;
  for (int t = 0; t < hp.max_outer_iters; ++t) {
    if (cancel && cancel->load()) break;
    const auto it0 = std::chrono::steady_clock::now();
    // geometric tightening, floor inner_tol
    const double tol_t = std::max(hp.inner_tol, 4.0 * hp.inner_tol * std::pow(0.5, t));
    const double w_tol = tol_t / (2.0 * L * std::max(1.0, hp.gamma1));
    const double d_tol = tol_t / 2.0;

    WStepResult ws = w_step(d_mat, data, pools, hp, w_tol, 10 * t + 1);
    w_mat = std::move(ws.w_mat);
    DStepResult ds = d_step(w_mat, data, pools, hp, d_tol, 10 * t + 2);
    d_mat = std::move(ds.d_mat);
    w_tilde = std::move(ds.w_tilde);

    double delta;
    if (wt_barometer) {
      delta = frob_diff(w_tilde, prev_w_tilde) / std::max(1.0, frob_total(w_tilde));
    } else {
      delta = prev_w_mat.empty()
                  ? 1.0
                  : frob_mat_diff(w_mat, prev_w_mat) / std::max(1.0, std::sqrt(w_mat.frob_norm_sq()));
    }

    OuterRecord rec;
    rec.iter = t + 1;
    rec.objective =
        detail::prml_objective_raw(d_mat, w_mat, w_tilde, data, pools, hp, nullptr);
    rec.delta_barometer = delta;
    rec.w_epochs = ws.epochs;
    rec.d_epochs = ds.epochs;
    rec.w_converged = ws.converged;
    rec.d_converged = ds.converged;
    rec.seconds = seconds_since(it0);
    trace.records.push_back(rec);

    if (t >= 1 && delta <= hp.outer_tol) {
      trace.converged = true;
      break;
    }
    prev_w_tilde = w_tilde;
    prev_w_mat = w_mat;
  }
  trace.total_seconds = seconds_since(t0);

  TrainResult out;
  out.model.d_mat = std::move(d_mat);
  out.model.w_mat = std::move(w_mat);
  out.model.w_tilde = std::move(w_tilde);
  out.model.pools = pools;
  out.model.hp = hp;
  out.trace = std::move(trace);
  return out;
}

TrainResult train_br(const Dataset& data, const Hyperparams& hp) {
  data.validate();
  hp.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int L = data.L, d = data.d;

  const SparseColumnFeatures feats(&data.features, d);
  Mat w_mat(d, L);
  std::vector<char> ok(L, 1);
  std::vector<long> epochs(L, 0);
  parallel_for(L, worker_count(), [&](int i) {
    const std::vector<std::int8_t> y = label_row(data.labels, i);
    SvmSolution sol = solve_svm(feats, y, hp.cost, hp.inner_tol, hp.max_inner_epochs,
                                mix_seed(hp.seed, 0xB12, i));
    for (int r = 0; r < d; ++r) w_mat(r, i) = sol.w[r];
    ok[i] = sol.converged ? 1 : 0;
    epochs[i] = sol.epochs;
  });

  TrainResult out;
  out.model.d_mat = Mat::identity(d);
  out.model.w_mat = std::move(w_mat);
  out.model.w_tilde.assign(L, {});
  out.model.pools = empty_pools(L);
  out.model.hp = hp;
  out.trace.converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  OuterRecord rec;
  rec.iter = 1;
  for (long e : epochs) rec.w_epochs += e;
  rec.seconds = seconds_since(t0);
  rec.w_converged = out.trace.converged;
  out.trace.records.push_back(rec);
  out.trace.total_seconds = rec.seconds;
  return out;
}

TrainResult train_prbr(const Dataset& data, const Hyperparams& hp) {
  data.validate();
  hp.validate_for(data.d, data.L, /*low_rank=*/false);
  const auto t0 = std::chrono::steady_clock::now();
  const int L = data.L, d = data.d;
  const int pool_k = data.L == 1 ? 0 : hp.resolved_pool_size(L);
  const PrivilegedSet pools = build_label_pools(data.labels, pool_k);

  const SparseColumnFeatures feats(&data.features, d);
  Mat d_rows(L, d);  // row i = label i's predictor in the input space
  std::vector<std::vector<double>> w_tilde(L);
  std::vector<char> ok(L, 1);
  std::vector<long> epochs(L, 0);
  parallel_for(L, worker_count(), [&](int i) {
    PooledPrivSource priv(&data.labels, &pools, i);
    SvmPlusProblem prob;
    prob.feats = &feats;
    prob.priv = &priv;
    prob.y = label_row(data.labels, i);
    prob.gamma = hp.gamma2;
    prob.cost = hp.cost;
    DualSolution sol = solve_svmplus(prob, hp.inner_tol, hp.max_inner_epochs,
                                     mix_seed(hp.seed, 0x9B, i));
    for (int c = 0; c < d; ++c) d_rows(i, c) = sol.primal[c];
    w_tilde[i] = std::move(sol.wtilde[0]);
    ok[i] = sol.converged ? 1 : 0;
    epochs[i] = sol.epochs;
  });

  TrainResult out;
  out.model.d_mat = std::move(d_rows);
  out.model.w_mat = Mat::identity(L);
  out.model.w_tilde = std::move(w_tilde);
  out.model.pools = pools;
  out.model.hp = hp;
  out.trace.converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  OuterRecord rec;
  rec.iter = 1;
  for (long e : epochs) rec.w_epochs += e;
  rec.seconds = seconds_since(t0);
  rec.w_converged = out.trace.converged;
  out.trace.records.push_back(rec);
  out.trace.total_seconds = rec.seconds;
  return out;
}

TrainResult train_lowrank(const Dataset& data, const Hyperparams& hp,
                          const std::atomic<bool>* cancel) {
  data.validate();
  hp.validate_for(data.d, data.L, /*low_rank=*/true);
  const auto t0 = std::chrono::steady_clock::now();
  const int k = hp.embed_dim, L = data.L;

  Mat d_mat = init_dictionary(k, data.d, mix_seed(hp.seed, 0xD1C7));
  Mat w_mat(k, L);
  Mat prev_w;

  TrainTrace trace;
  for (int t = 0; t < hp.max_outer_iters; ++t) {
    if (cancel && cancel->load()) break;
    const auto it0 = std::chrono::steady_clock::now();
    const double tol_t = std::max(hp.inner_tol, 4.0 * hp.inner_tol * std::pow(0.5, t));
    const double w_tol = tol_t / (2.0 * L);
    const double d_tol = tol_t / 2.0;

    // W-step: per-label plain hinge duals on the projected inputs
    const DenseRowFeatures feats(project_features(d_mat, data));
    std::vector<long> epochs(L, 0);
    std::vector<char> ok(L, 1);
    parallel_for(L, worker_count(), [&](int i) {
      const std::vector<std::int8_t> y = label_row(data.labels, i);
      SvmSolution sol = solve_svm(feats, y, hp.cost, w_tol, hp.max_inner_epochs,
                                  mix_seed(hp.seed, 0x10F * (t + 1), i));
      for (int r = 0; r < k; ++r) w_mat(r, i) = sol.w[r];
      ok[i] = sol.converged ? 1 : 0;
      epochs[i] = sol.epochs;
    });

    // D-step: one plain hinge dual over the rank-one objects
    RankOneFeatures rank_one(&w_mat, &data.features, data.d);
    SvmSolution dsol = solve_svm(rank_one, label_vec(data.labels), hp.cost, d_tol,
                                 hp.max_inner_epochs, mix_seed(hp.seed, 0x20F, t));
    d_mat = rank_one.unpack_dictionary(dsol.w);

    const double delta = prev_w.empty()
                             ? 1.0
                             : frob_mat_diff(w_mat, prev_w) /
                                   std::max(1.0, std::sqrt(w_mat.frob_norm_sq()));
    OuterRecord rec;
    rec.iter = t + 1;
    rec.objective = detail::lowrank_objective(d_mat, w_mat, data, hp.cost);
    rec.delta_barometer = delta;
    for (long e : epochs) rec.w_epochs += e;
    rec.d_epochs = dsol.epochs;
    rec.w_converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
    rec.d_converged = dsol.converged;
    rec.seconds = seconds_since(it0);
    trace.records.push_back(rec);

    if (t >= 1 && delta <= hp.outer_tol) {
      trace.converged = true;
      break;
    }
    prev_w = w_mat;
  }
  trace.total_seconds = seconds_since(t0);

  TrainResult out;
  out.model.d_mat = std::move(d_mat);
  out.model.w_mat = std::move(w_mat);
  out.model.w_tilde.assign(L, {});
  out.model.pools = empty_pools(L);
  out.model.hp = hp;
  out.trace = std::move(trace);
  return out;
}

}  // namespace privml
