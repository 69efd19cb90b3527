#pragma once

#include <string>
#include <vector>

#include "privml/dataset.hpp"
#include "privml/mat.hpp"

namespace privml {

// The six ranking/threshold measures, all in [0, 1]. Columns (or labels, for
// the macro AUC) lacking the required positives/negatives are excluded and
// counted in `skipped`.
struct EvalReport {
  double hamming_loss = 0;
  double one_error = 0;
  double coverage = 0;
  double ranking_loss = 0;
  double average_precision = 0;
  double macro_auc = 0;
  int n_eval = 0;
  int skipped_one_error = 0;
  int skipped_coverage = 0;
  int skipped_ranking_loss = 0;
  int skipped_average_precision = 0;
  int skipped_macro_auc = 0;

  std::vector<std::pair<std::string, double>> metric_values() const {
    return {{"hamming_loss", hamming_loss},
            {"one_error", one_error},
            {"coverage", coverage},
            {"ranking_loss", ranking_loss},
            {"average_precision", average_precision},
            {"macro_auc", macro_auc}};
  }
};

// scores and truth are L x n (labels by examples). Ranks are per column,
// rank 1 = highest score, ties broken by the smaller label index.
EvalReport evaluate(const Mat& scores, const LabelMatrix& truth);

// Wilcoxon AUC of one label row; ties count 1/2. Returns false (skip) when
// the row lacks positives or negatives.
bool per_label_auc(std::span<const double> scores_row, std::span<const std::int8_t> truth_row,
                   double& auc_out);

}  // namespace privml
