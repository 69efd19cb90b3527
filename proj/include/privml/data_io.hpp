#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "privml/dataset.hpp"
#include "privml/mat.hpp"

namespace privml {

enum class DataFormat { sparse_ml, dense_csv };

struct DatasetFile {
  std::string path;
  DataFormat format = DataFormat::sparse_ml;
  int csv_label_count = 0;  // required for dense_csv (no self-describing header)
};

// sparse-ml: header `privml-data v1 n=<n> d=<d> L=<L>`, then one example per
// line: comma-separated 0-based positive-label indices (possibly empty), one
// space, then `index:value` feature pairs with 0-based indices < d.
// dense-csv: first csv_label_count columns are labels in {0,1} or {-1,+1}
// (auto-detected), the rest are features.
// Labels become +/-1 and features are bias-augmented, so the returned d is
// the header d plus one.
Dataset load_dataset(const DatasetFile& file);

// Writes sparse-ml with the bias coordinate stripped; load o save o load is
// the identity.
void save_dataset(const Dataset& data, const std::string& path);

// Seeded permutation split; first floor(fraction*n) examples to train.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

// Rank-k ground truth for tests: scores = W*^T D* x with per-label
// thresholds hit the requested positive rate.
struct SynthGroundTruth {
  Mat d_true;  // k x d (raw feature space, no bias column)
  Mat w_true;  // k x L
  std::vector<double> thresholds;
};

struct SynthDataset {
  Dataset data;  // bias-augmented, same convention as load_dataset
  SynthGroundTruth truth;
};

// Gaussian sparse features, low-rank scores, per-label thresholds matching
// label_density, then independent label flips with probability noise. With
// noise = 0 a rank k+1 model in the augmented space separates the data by
// construction.
SynthDataset synth_lowrank(int n, int d, int L, int k, double label_density, double noise,
                           std::uint64_t seed);

}  // namespace privml
