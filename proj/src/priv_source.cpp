#include "privml/priv_source.hpp"

namespace privml {

DensePrivSource::DensePrivSource(std::vector<std::vector<double>> vecs,
                                 std::vector<int> block_ids, int num_blocks)
    : vecs_(std::move(vecs)), block_ids_(std::move(block_ids)), num_blocks_(num_blocks) {
  if (vecs_.size() != block_ids_.size())
    throw DimensionError("DensePrivSource: vector/block count mismatch");
  block_dims_.assign(num_blocks_, -1);
  for (std::size_t s = 0; s < vecs_.size(); ++s) {
    const int b = block_ids_[s];
    if (b < 0 || b >= num_blocks_) throw DimensionError("DensePrivSource: block id out of range");
    const int dim = static_cast<int>(vecs_[s].size());
    if (block_dims_[b] == -1)
      block_dims_[b] = dim;
    else if (block_dims_[b] != dim)
      throw DimensionError("DensePrivSource: inconsistent dims within a block");
  }
  for (int& bd : block_dims_)
    if (bd == -1) bd = 0;
}

DensePrivSource::DensePrivSource(std::vector<std::vector<double>> vecs)
    : DensePrivSource(std::move(vecs), std::vector<int>(0), 1) {
  block_ids_.assign(vecs_.size(), 0);
  block_dims_.assign(1, vecs_.empty() ? 0 : static_cast<int>(vecs_.front().size()));
  for (const auto& v : vecs_)
    if (static_cast<int>(v.size()) != block_dims_[0])
      throw DimensionError("DensePrivSource: inconsistent dims within a block");
}

double DensePrivSource::norm_sq(int s) const {
  double acc = 0.0;
  for (double v : vecs_[s]) acc += v * v;
  return acc;
}

double DensePrivSource::dot(std::span<const double> wt, int s) const {
  const std::vector<double>& p = vecs_[s];
  double acc = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) acc += wt[t] * p[t];
  return acc;
}

void DensePrivSource::add(std::span<double> wt, double coef, int s) const {
  const std::vector<double>& p = vecs_[s];
  for (std::size_t t = 0; t < p.size(); ++t) wt[t] += coef * p[t];
}

double DensePrivSource::dot_pair(int s, int t) const {
  if (block_ids_[s] != block_ids_[t]) return 0.0;
  const std::vector<double>&a = vecs_[s], &b = vecs_[t];
  double acc = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) acc += a[u] * b[u];
  return acc;
}

PooledPrivSource::PooledPrivSource(const LabelMatrix* y, const PrivilegedSet* pools, int label)
    : y_(y), pools_(pools), single_label_(label) {}

PooledPrivSource::PooledPrivSource(const LabelMatrix* y, const PrivilegedSet* pools)
    : y_(y), pools_(pools), single_label_(-1) {}

double PooledPrivSource::dot(std::span<const double> wt, int s) const {
  const std::vector<std::int32_t>& pool = pools_->pool(label_at(s));
  const int j = example_at(s);
  double acc = 0.0;
  for (std::size_t t = 0; t < pool.size(); ++t) acc += wt[t] * (*y_)(pool[t], j);
  return acc;
}

void PooledPrivSource::add(std::span<double> wt, double coef, int s) const {
  const std::vector<std::int32_t>& pool = pools_->pool(label_at(s));
  const int j = example_at(s);
  for (std::size_t t = 0; t < pool.size(); ++t) wt[t] += coef * (*y_)(pool[t], j);
}

double PooledPrivSource::dot_pair(int s, int t) const {
  if (block_of(s) != block_of(t)) return 0.0;
  const std::vector<std::int32_t>& pool = pools_->pool(label_at(s));
  const int j = example_at(s), q = example_at(t);
  double acc = 0.0;
  for (std::int32_t p : pool) acc += static_cast<double>((*y_)(p, j)) * (*y_)(p, q);
  return acc;
}

}  // namespace privml
