#include "privml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "privml/errors.hpp"

namespace privml {

bool per_label_auc(std::span<const double> scores_row, std::span<const std::int8_t> truth_row,
                   double& auc_out) {
  if (scores_row.size() != truth_row.size())
    throw DimensionError("per_label_auc: row length mismatch");
  const int n = static_cast<int>(scores_row.size());
  long pos = 0, neg = 0;
  for (int j = 0; j < n; ++j) (truth_row[j] > 0 ? pos : neg)++;
  if (pos == 0 || neg == 0) return false;

  // rank-sum with average ranks over tie groups; numerator equals
  // wins + ties/2 of the pairwise Wilcoxon count, exactly
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores_row[a] < scores_row[b]; });
  double rank_sum_pos = 0.0;
  int j = 0;
  while (j < n) {
    int j2 = j;
    while (j2 + 1 < n && scores_row[order[j2 + 1]] == scores_row[order[j]]) ++j2;
    const double avg_rank = 0.5 * static_cast<double>((j + 1) + (j2 + 1));
    for (int t = j; t <= j2; ++t)
      if (truth_row[order[t]] > 0) rank_sum_pos += avg_rank;
    j = j2 + 1;
  }
  const double numer = rank_sum_pos - 0.5 * static_cast<double>(pos) * (pos + 1);
  auc_out = numer / (static_cast<double>(pos) * static_cast<double>(neg));
  return true;
}

EvalReport evaluate(const Mat& scores, const LabelMatrix& truth) {
  const int L = scores.rows(), n = scores.cols();
  if (L != truth.num_labels() || n != truth.num_examples())
    throw DimensionError("evaluate: scores and truth shapes differ");
  if (L < 1 || n < 1) throw ValidationError("evaluate: empty input");
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(scores(i, j))) throw ValidationError("evaluate: non-finite score");

  EvalReport rep;
  rep.n_eval = n;

  long hamming_errs = 0;
  long one_err_count = 0, one_err_used = 0;
  double coverage_sum = 0.0;
  long coverage_used = 0;
  double rloss_sum = 0.0;
  long rloss_used = 0;
  double ap_sum = 0.0;
  long ap_used = 0;

  std::vector<int> order(L);
  std::vector<int> rank(L);
  std::vector<int> pos_upto(L);  // positives among ranks 1..r
  for (int j = 0; j < n; ++j) {
    int pos = 0, neg = 0;
    for (int i = 0; i < L; ++i) {
      const double s = scores(i, j);
      const int8_t y = truth(i, j);
      if ((s >= 0.0 ? 1 : -1) != y) ++hamming_errs;
      (y > 0 ? pos : neg)++;
    }

    // rank 1 = highest score; ties toward the smaller label index
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores(a, j) != scores(b, j)) return scores(a, j) > scores(b, j);
      return a < b;
    });
    for (int r = 0; r < L; ++r) rank[order[r]] = r + 1;
    int running = 0;
    for (int r = 0; r < L; ++r) {
      if (truth(order[r], j) > 0) ++running;
      pos_upto[r] = running;
    }

    if (pos > 0) {
      ++one_err_used;
      if (truth(order[0], j) < 0) ++one_err_count;

      int max_rank = 0;
      for (int i = 0; i < L; ++i)
        if (truth(i, j) > 0) max_rank = std::max(max_rank, rank[i]);
      coverage_sum += static_cast<double>(max_rank - 1) / L;
      ++coverage_used;

      double ap_col = 0.0;
      for (int i = 0; i < L; ++i)  // label-ascending accumulation
        if (truth(i, j) > 0)
          ap_col += static_cast<double>(pos_upto[rank[i] - 1]) / rank[i];
      ap_sum += ap_col / pos;
      ++ap_used;
    }
    if (pos > 0 && neg > 0) {
      long violations = 0;
      for (int p = 0; p < L; ++p) {
        if (truth(p, j) < 0) continue;
        for (int q = 0; q < L; ++q)
          if (truth(q, j) < 0 && scores(p, j) <= scores(q, j)) ++violations;
      }
      rloss_sum += static_cast<double>(violations) / (static_cast<double>(pos) * neg);
      ++rloss_used;
    }
  }

  rep.hamming_loss = static_cast<double>(hamming_errs) / (static_cast<double>(n) * L);
  rep.skipped_one_error = n - static_cast<int>(one_err_used);
  rep.one_error = one_err_used ? static_cast<double>(one_err_count) / one_err_used : 0.0;
  rep.skipped_coverage = n - static_cast<int>(coverage_used);
  rep.coverage = coverage_used ? coverage_sum / coverage_used : 0.0;
  rep.skipped_ranking_loss = n - static_cast<int>(rloss_used);
  rep.ranking_loss = rloss_used ? rloss_sum / rloss_used : 0.0;
  rep.skipped_average_precision = n - static_cast<int>(ap_used);
  rep.average_precision = ap_used ? ap_sum / ap_used : 0.0;

  double auc_sum = 0.0;
  long auc_used = 0;
  std::vector<double> srow(n);
  std::vector<std::int8_t> trow(n);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < n; ++j) srow[j] = scores(i, j);
    for (int j = 0; j < n; ++j) trow[j] = truth(i, j);
    double auc;
    if (per_label_auc(srow, trow, auc)) {
      auc_sum += auc;
      ++auc_used;
    }
  }
  rep.skipped_macro_auc = L - static_cast<int>(auc_used);
  rep.macro_auc = auc_used ? auc_sum / auc_used : 0.0;
  return rep;
}

}  // namespace privml
