#include "privml/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace privml {

void Model::validate() const {
  if (d_mat.rows() < 1 || d_mat.cols() < 1) throw ValidationError("Model: empty dictionary");
  if (w_mat.rows() != d_mat.rows()) throw DimensionError("Model: D and W row counts differ");
  if (w_mat.cols() < 1) throw ValidationError("Model: no labels");
  const int L = w_mat.cols();
  if (static_cast<int>(w_tilde.size()) != L)
    throw DimensionError("Model: correcting vector count != L");
  pools.validate(L);
  for (int i = 0; i < L; ++i)
    if (static_cast<int>(w_tilde[i].size()) != pools.priv_dim(i))
      throw DimensionError("Model: correcting vector length != pool size");
}

std::vector<double> predict_scores(const Model& m, const SparseVec& x) {
  if (x.dim != m.d())
    throw DimensionError("predict_scores: input dim " + std::to_string(x.dim) +
                         " != model dim " + std::to_string(m.d()));
  const int k = m.k(), L = m.num_labels();
  std::vector<double> proj(k, 0.0);
  for (std::size_t t = 0; t < x.indices.size(); ++t) {
    const double v = x.values[t];
    const std::int32_t c = x.indices[t];
    for (int r = 0; r < k; ++r) proj[r] += v * m.d_mat(r, c);
  }
  std::vector<double> scores(L, 0.0);
  for (int r = 0; r < k; ++r) {
    const double pr = proj[r];
    if (pr == 0.0) continue;
    const double* wrow = m.w_mat.row(r).data();
    for (int i = 0; i < L; ++i) scores[i] += pr * wrow[i];
  }
  return scores;
}

std::vector<std::int8_t> predict_labels(std::span<const double> scores) {
  std::vector<std::int8_t> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw ValidationError("predict_labels: non-finite score at label " + std::to_string(i));
    out[i] = scores[i] >= 0.0 ? 1 : -1;
  }
  return out;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_row(std::ostream& os, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ' ';
    os << fmt17(row[i]);
  }
  os << '\n';
}

std::vector<double> parse_doubles(const std::string& line, const std::string& path, long lineno) {
  std::vector<double> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ParseError("bad number '" + tok + "'", path, lineno);
    out.push_back(v);
  }
  return out;
}

}  // namespace

void save_model(const Model& m, const std::string& path) {
  m.validate();
  std::ofstream os(path);
  if (!os) throw IoError("save_model: cannot open " + path);
  const int k = m.k(), d = m.d(), L = m.num_labels();
  os << "privml-model v1 " << k << ' ' << d << ' ' << L << '\n';
  os << "D\n";
  for (int r = 0; r < k; ++r) write_row(os, m.d_mat.row(r));
  os << "W\n";
  for (int r = 0; r < k; ++r) write_row(os, m.w_mat.row(r));
  for (int i = 0; i < L; ++i) {
    os << "WTILDE " << i << '\n';
    write_row(os, m.w_tilde[i]);
  }
  for (int i = 0; i < L; ++i) {
    os << "POOL " << i << '\n';
    const auto& pool = m.pools.pool(i);
    for (std::size_t t = 0; t < pool.size(); ++t) {
      if (t) os << ' ';
      os << pool[t];
    }
    os << '\n';
  }
  os << "HP\n";
  os << "gamma1 " << fmt17(m.hp.gamma1) << '\n';
  os << "gamma2 " << fmt17(m.hp.gamma2) << '\n';
  os << "cost " << fmt17(m.hp.cost) << '\n';
  os << "embed_dim " << m.hp.embed_dim << '\n';
  os << "pool_size " << m.hp.pool_size << '\n';
  os << "inner_tol " << fmt17(m.hp.inner_tol) << '\n';
  os << "outer_tol " << fmt17(m.hp.outer_tol) << '\n';
  os << "max_inner_epochs " << m.hp.max_inner_epochs << '\n';
  os << "max_outer_iters " << m.hp.max_outer_iters << '\n';
  os << "seed " << m.hp.seed << '\n';
  if (!os) throw IoError("save_model: write failed for " + path);
}

Model load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_model: cannot open " + path);
  long lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(is, line)) throw ParseError("unexpected end of file", path, lineno);
    ++lineno;
    return line;
  };

  next_line();
  int k = 0, d = 0, L = 0;
  {
    std::istringstream iss(line);
    std::string magic, version;
    if (!(iss >> magic >> version >> k >> d >> L) || magic != "privml-model" || version != "v1")
      throw ParseError("bad header, expected 'privml-model v1 k d L'", path, lineno);
    if (k < 1 || d < 1 || L < 1) throw ParseError("non-positive dimensions in header", path, lineno);
  }

  Model m;
  m.d_mat = Mat(k, d);
  m.w_mat = Mat(k, L);

  auto expect = [&](const std::string& tag) {
    next_line();
    if (line != tag) throw ParseError("expected section '" + tag + "'", path, lineno);
  };
  auto read_row = [&](std::span<double> dst) {
    next_line();
    const std::vector<double> vals = parse_doubles(line, path, lineno);
    if (vals.size() != dst.size())
      throw ParseError("expected " + std::to_string(dst.size()) + " values, got " +
                           std::to_string(vals.size()),
                       path, lineno);
    for (std::size_t i = 0; i < vals.size(); ++i) dst[i] = vals[i];
  };

  expect("D");
  for (int r = 0; r < k; ++r) read_row(m.d_mat.row(r));
  expect("W");
  for (int r = 0; r < k; ++r) read_row(m.w_mat.row(r));

  m.w_tilde.resize(L);
  for (int i = 0; i < L; ++i) {
    expect("WTILDE " + std::to_string(i));
    next_line();
    m.w_tilde[i] = parse_doubles(line, path, lineno);
  }

  m.pools.pools.resize(L);
  for (int i = 0; i < L; ++i) {
    expect("POOL " + std::to_string(i));
    next_line();
    std::istringstream iss(line);
    std::vector<std::int32_t> pool;
    long v;
    while (iss >> v) pool.push_back(static_cast<std::int32_t>(v));
    m.pools.pools[i] = std::move(pool);
  }

  expect("HP");
  auto read_kv = [&](const std::string& key) -> std::string {
    next_line();
    std::istringstream iss(line);
    std::string k2, v2;
    if (!(iss >> k2 >> v2) || k2 != key)
      throw ParseError("expected '" + key + " <value>'", path, lineno);
    return v2;
  };
  m.hp.gamma1 = std::stod(read_kv("gamma1"));
  m.hp.gamma2 = std::stod(read_kv("gamma2"));
  m.hp.cost = std::stod(read_kv("cost"));
  m.hp.embed_dim = std::stoi(read_kv("embed_dim"));
  m.hp.pool_size = std::stoi(read_kv("pool_size"));
  m.hp.inner_tol = std::stod(read_kv("inner_tol"));
  m.hp.outer_tol = std::stod(read_kv("outer_tol"));
  m.hp.max_inner_epochs = std::stoi(read_kv("max_inner_epochs"));
  m.hp.max_outer_iters = std::stoi(read_kv("max_outer_iters"));
  m.hp.seed = std::stoll(read_kv("seed"));

  m.validate();
  return m;
}

}  // namespace privml
