#include "privml/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "privml/rng.hpp"

namespace privml {

namespace {

struct ParsedExample {
  std::vector<std::int32_t> pos_labels;
  std::vector<std::int32_t> idx;
  std::vector<double> val;
};

ParsedExample parse_sparse_line(const std::string& line, int d, int L, const std::string& path,
                                long lineno) {
  ParsedExample ex;
  const std::size_t space = line.find(' ');
  const std::string label_part = line.substr(0, space);
  const std::string feat_part = space == std::string::npos ? "" : line.substr(space + 1);

  if (!label_part.empty()) {
    std::istringstream ls(label_part);
    std::string tok;
    while (std::getline(ls, tok, ',')) {
      if (tok.empty()) throw ParseError("empty label token", path, lineno);
      char* end = nullptr;
      const long v = std::strtol(tok.c_str(), &end, 10);
      if (end == tok.c_str() || *end != '\0')
        throw ParseError("bad label index '" + tok + "'", path, lineno);
      if (v < 0 || v >= L)
        throw ParseError("label index " + std::to_string(v) + " out of range [0, " +
                             std::to_string(L) + ")",
                         path, lineno);
      ex.pos_labels.push_back(static_cast<std::int32_t>(v));
    }
  }

  std::istringstream fs(feat_part);
  std::string pair;
  while (fs >> pair) {
    const std::size_t colon = pair.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size())
      throw ParseError("bad feature pair '" + pair + "'", path, lineno);
    char* end = nullptr;
    const long idx = std::strtol(pair.c_str(), &end, 10);
    if (end != pair.c_str() + colon)
      throw ParseError("bad feature index in '" + pair + "'", path, lineno);
    const double v = std::strtod(pair.c_str() + colon + 1, &end);
    if (*end != '\0' || !std::isfinite(v))
      throw ParseError("bad feature value in '" + pair + "'", path, lineno);
    if (idx < 0 || idx >= d)
      throw ParseError("feature index " + std::to_string(idx) + " out of range [0, " +
                           std::to_string(d) + ")",
                       path, lineno);
    ex.idx.push_back(static_cast<std::int32_t>(idx));
    ex.val.push_back(v);
  }

  // order-insensitive input, but duplicates are malformed
  std::vector<std::size_t> ord(ex.idx.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return ex.idx[a] < ex.idx[b]; });
  std::vector<std::int32_t> idx2(ex.idx.size());
  std::vector<double> val2(ex.val.size());
  for (std::size_t t = 0; t < ord.size(); ++t) {
    idx2[t] = ex.idx[ord[t]];
    val2[t] = ex.val[ord[t]];
    if (t > 0 && idx2[t] == idx2[t - 1])
      throw ParseError("duplicate feature index " + std::to_string(idx2[t]), path, lineno);
  }
  ex.idx = std::move(idx2);
  ex.val = std::move(val2);
  return ex;
}

Dataset load_sparse_ml(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_dataset: cannot open " + path);
  std::string line;
  long lineno = 0;

  if (!std::getline(is, line)) throw ParseError("empty file", path, 1);
  ++lineno;
  int n = 0, d = 0, L = 0;
  {
    std::istringstream iss(line);
    std::string magic, version, kv;
    if (!(iss >> magic >> version) || magic != "privml-data" || version != "v1")
      throw ParseError("bad header, expected 'privml-data v1 n=<n> d=<d> L=<L>'", path, lineno);
    while (iss >> kv) {
      if (kv.rfind("n=", 0) == 0)
        n = std::stoi(kv.substr(2));
      else if (kv.rfind("d=", 0) == 0)
        d = std::stoi(kv.substr(2));
      else if (kv.rfind("L=", 0) == 0)
        L = std::stoi(kv.substr(2));
      else
        throw ParseError("unknown header field '" + kv + "'", path, lineno);
    }
    if (n < 1 || d < 1 || L < 1) throw ParseError("header needs n, d, L >= 1", path, lineno);
  }

  std::vector<SparseVec> raw;
  raw.reserve(n);
  LabelMatrix labels(L, n);
  int count = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() && count == n) break;  // trailing newline
    if (count >= n) throw ParseError("more examples than header n", path, lineno);
    ParsedExample ex = parse_sparse_line(line, d, L, path, lineno);
    for (std::int32_t i : ex.pos_labels) labels.set(i, count, 1);
    raw.emplace_back(std::move(ex.idx), std::move(ex.val), d);
    ++count;
  }
  if (count != n)
    throw ParseError("header declares n=" + std::to_string(n) + " but file has " +
                         std::to_string(count) + " examples",
                     path, lineno);

  Dataset out;
  out.features = augment_bias(raw);
  out.labels = std::move(labels);
  out.n = n;
  out.d = d + 1;
  out.L = L;
  out.validate();
  return out;
}

Dataset load_dense_csv(const std::string& path, int L) {
  if (L < 1) throw ValidationError("load_dataset: dense-csv needs csv_label_count >= 1");
  std::ifstream is(path);
  if (!is) throw IoError("load_dataset: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  int width = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream iss(line);
    std::string cell;
    while (std::getline(iss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || !std::isfinite(v))
        throw ParseError("bad cell '" + cell + "'", path, lineno);
      row.push_back(v);
    }
    if (width == -1)
      width = static_cast<int>(row.size());
    else if (static_cast<int>(row.size()) != width)
      throw ParseError("ragged row: expected " + std::to_string(width) + " cells", path, lineno);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", path, lineno);
  if (width <= L) throw ParseError("row width must exceed label count", path, 1);

  const int n = static_cast<int>(rows.size());
  const int d = width - L;
  // auto-detect label coding: any -1 means +/-1, otherwise 0/1
  bool plus_minus = false;
  for (const auto& row : rows)
    for (int i = 0; i < L; ++i)
      if (row[i] == -1.0) plus_minus = true;

  LabelMatrix labels(L, n);
  std::vector<SparseVec> raw;
  raw.reserve(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < L; ++i) {
      const double v = rows[j][i];
      if (plus_minus ? (v != 1.0 && v != -1.0) : (v != 1.0 && v != 0.0))
        throw ParseError("label cell not in the detected coding", path, j + 1);
      labels.set(i, j, v == 1.0 ? 1 : -1);
    }
    std::vector<std::int32_t> idx;
    std::vector<double> val;
    for (int c = 0; c < d; ++c) {
      const double v = rows[j][L + c];
      if (v != 0.0) {
        idx.push_back(c);
        val.push_back(v);
      }
    }
    raw.emplace_back(std::move(idx), std::move(val), d);
  }

  Dataset out;
  out.features = augment_bias(raw);
  out.labels = std::move(labels);
  out.n = n;
  out.d = d + 1;
  out.L = L;
  out.validate();
  return out;
}

}  // namespace

Dataset load_dataset(const DatasetFile& file) {
  switch (file.format) {
    case DataFormat::sparse_ml:
      return load_sparse_ml(file.path);
    case DataFormat::dense_csv:
      return load_dense_csv(file.path, file.csv_label_count);
  }
  throw ValidationError("load_dataset: unknown format");
}

void save_dataset(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream os(path);
  if (!os) throw IoError("save_dataset: cannot open " + path);
  const int d_raw = data.d - 1;  // strip the bias coordinate
  os << "privml-data v1 n=" << data.n << " d=" << d_raw << " L=" << data.L << '\n';
  char buf[40];
  for (int j = 0; j < data.n; ++j) {
    bool first = true;
    for (int i = 0; i < data.L; ++i) {
      if (data.labels(i, j) > 0) {
        if (!first) os << ',';
        os << i;
        first = false;
      }
    }
    const SparseVec& x = data.features[j];
    for (std::size_t t = 0; t < x.indices.size(); ++t) {
      if (x.indices[t] == d_raw) continue;  // bias
      std::snprintf(buf, sizeof(buf), "%.17g", x.values[t]);
      os << ' ' << x.indices[t] << ':' << buf;
    }
    os << '\n';
  }
  if (!os) throw IoError("save_dataset: write failed for " + path);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("split: fraction must be in (0, 1)");
  data.validate();
  const int n_train = static_cast<int>(std::floor(train_fraction * data.n));
  const int n_test = data.n - n_train;
  if (n_train < 1 || n_test < 1) throw ValidationError("split: a side would be empty");

  std::vector<int> perm(data.n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  auto take = [&](int begin, int count) {
    Dataset out;
    out.n = count;
    out.d = data.d;
    out.L = data.L;
    out.features.reserve(count);
    out.labels = LabelMatrix(data.L, count);
    for (int t = 0; t < count; ++t) {
      const int j = perm[begin + t];
      out.features.push_back(data.features[j]);
      for (int i = 0; i < data.L; ++i) out.labels.set(i, t, data.labels(i, j));
    }
    return out;
  };
  return {take(0, n_train), take(n_train, n_test)};
}

SynthDataset synth_lowrank(int n, int d, int L, int k, double label_density, double noise,
                           std::uint64_t seed) {
  if (n < 1 || d < 1 || L < 1 || k < 1) throw ValidationError("synth_lowrank: counts must be >= 1");
  if (k > std::min(d, L)) throw ValidationError("synth_lowrank: k must be <= min(d, L)");
  if (!(label_density > 0.0 && label_density < 1.0))
    throw ValidationError("synth_lowrank: density must be in (0, 1)");
  if (noise < 0.0 || noise > 1.0) throw ValidationError("synth_lowrank: noise must be in [0, 1]");

  Rng rng(seed);
  SynthDataset out;
  out.truth.d_true = Mat(k, d);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < d; ++c) out.truth.d_true(r, c) = rng.normal();
  out.truth.w_true = Mat(k, L);
  for (int r = 0; r < k; ++r)
    for (int i = 0; i < L; ++i) out.truth.w_true(r, i) = rng.normal();

  // Gaussian sparse features at density 1/2, at least one nonzero each
  std::vector<SparseVec> raw;
  raw.reserve(n);
  for (int j = 0; j < n; ++j) {
    std::vector<std::int32_t> idx;
    std::vector<double> val;
    for (int c = 0; c < d; ++c) {
      if (rng.uniform() < 0.5) {
        idx.push_back(c);
        val.push_back(rng.normal());
      }
    }
    if (idx.empty()) {
      idx.push_back(rng.bounded(d));
      val.push_back(rng.normal());
    }
    raw.emplace_back(std::move(idx), std::move(val), d);
  }

  Mat score(L, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> proj(k, 0.0);
    const SparseVec& x = raw[j];
    for (std::size_t t = 0; t < x.indices.size(); ++t)
      for (int r = 0; r < k; ++r) proj[r] += x.values[t] * out.truth.d_true(r, x.indices[t]);
    for (int i = 0; i < L; ++i) {
      double s = 0.0;
      for (int r = 0; r < k; ++r) s += out.truth.w_true(r, i) * proj[r];
      score(i, j) = s;
    }
  }

  // per-label threshold at the (1 - density) quantile of the scores
  out.truth.thresholds.resize(L);
  LabelMatrix labels(L, n);
  std::vector<double> row(n);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < n; ++j) row[j] = score(i, j);
    std::vector<double> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    int cut = static_cast<int>(std::floor((1.0 - label_density) * n));
    cut = std::clamp(cut, 0, n - 1);
    // midpoint keeps the boundary example strictly positive
    const double thr = cut == 0 ? sorted[0] - 1.0 : 0.5 * (sorted[cut - 1] + sorted[cut]);
    out.truth.thresholds[i] = thr;
    for (int j = 0; j < n; ++j) labels.set(i, j, row[j] > thr ? 1 : -1);
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < n; ++j)
      if (noise > 0.0 && rng.uniform() < noise) labels.set(i, j, -labels(i, j));

  out.data.features = augment_bias(raw);
  out.data.labels = std::move(labels);
  out.data.n = n;
  out.data.d = d + 1;
  out.data.L = L;
  out.data.validate();
  return out;
}

}  // namespace privml
