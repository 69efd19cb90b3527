// privml: train / predict / eval / ablate / selftest for privileged
// multi-label learning and its baselines.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "privml/data_io.hpp"
#include "privml/metrics.hpp"
#include "privml/model.hpp"
#include "privml/report.hpp"
#include "privml/rng.hpp"
#include "privml/selftest.hpp"
#include "privml/trainers.hpp"

using nlohmann::json;
using namespace privml;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitSelftestFailed = 3;

struct DataOpts {
  std::string path;
  std::string format = "sparse-ml";
  int csv_labels = 0;
};

struct HyperOpts {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double cost = 1.0;
  int k = 0;          // 0: ceil(0.9 L)
  int pool_size = 0;  // 0: L-1
  double inner_tol = 1e-6;
  double outer_tol = 1e-3;
  int max_outer = 30;
  int max_inner = 1000;
  std::int64_t seed = 1;
};

void add_data_opts(CLI::App* cmd, DataOpts& o, const char* flag, bool required) {
  auto* opt = cmd->add_option(flag, o.path, "dataset file");
  if (required) opt->required();
  cmd->add_option("--data-format", o.format, "sparse-ml | dense-csv")
      ->check(CLI::IsMember({"sparse-ml", "dense-csv"}));
  cmd->add_option("--csv-labels", o.csv_labels, "label column count for dense-csv");
}

void add_hyper_opts(CLI::App* cmd, HyperOpts& o) {
  cmd->add_option("--gamma1", o.gamma1, "weight of |w_i|^2 in the full model");
  cmd->add_option("--gamma2", o.gamma2, "weight of the correcting weights");
  cmd->add_option("--cost", o.cost, "hinge penalty C");
  cmd->add_option("--k", o.k, "embedding dimension (default ceil(0.9 L))");
  cmd->add_option("--pool-size", o.pool_size, "privileged pool size K (default L-1)");
  cmd->add_option("--inner-tol", o.inner_tol, "dual CD stopping tolerance");
  cmd->add_option("--outer-tol", o.outer_tol, "relative correcting-weight change threshold");
  cmd->add_option("--max-outer", o.max_outer, "outer iteration cap");
  cmd->add_option("--max-inner", o.max_inner, "dual CD epoch cap");
  cmd->add_option("--seed", o.seed, "RNG seed");
}

Dataset load_data(const DataOpts& o) {
  DatasetFile f;
  f.path = o.path;
  f.format = o.format == "dense-csv" ? DataFormat::dense_csv : DataFormat::sparse_ml;
  f.csv_label_count = o.csv_labels;
  return load_dataset(f);
}

int auto_k(int requested, int L) {
  if (requested > 0) return requested;
  return static_cast<int>(std::ceil(0.9 * L));
}

Hyperparams make_hp(const HyperOpts& o, int L) {
  Hyperparams hp;
  hp.gamma1 = o.gamma1;
  hp.gamma2 = o.gamma2;
  hp.cost = o.cost;
  hp.embed_dim = auto_k(o.k, L);
  hp.pool_size = o.pool_size;
  hp.inner_tol = o.inner_tol;
  hp.outer_tol = o.outer_tol;
  hp.max_outer_iters = o.max_outer;
  hp.max_inner_epochs = o.max_inner;
  hp.seed = o.seed;
  return hp;
}

TrainResult dispatch_train(const std::string& algo, const Dataset& data, const Hyperparams& hp) {
  if (algo == "prml") return train_prml(data, hp);
  if (algo == "prbr") return train_prbr(data, hp);
  if (algo == "br") return train_br(data, hp);
  if (algo == "lowrank") return train_lowrank(data, hp);
  throw ValidationError("unknown algorithm '" + algo + "'");
}

json metrics_json(const EvalReport& rep) {
  json j;
  for (const auto& [name, v] : rep.metric_values()) j[name] = v;
  j["n_eval"] = rep.n_eval;
  j["skipped"] = {{"one_error", rep.skipped_one_error},
                  {"coverage", rep.skipped_coverage},
                  {"ranking_loss", rep.skipped_ranking_loss},
                  {"average_precision", rep.skipped_average_precision},
                  {"macro_auc", rep.skipped_macro_auc}};
  return j;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open report path " + path);
  os << j.dump(2) << '\n';
}

EvalReport eval_model(const Model& m, const Dataset& test) {
  Mat scores(test.L, test.n);
  for (int j = 0; j < test.n; ++j) {
    const std::vector<double> s = predict_scores(m, test.features[j]);
    for (int i = 0; i < test.L; ++i) scores(i, j) = s[i];
  }
  return evaluate(scores, test.labels);
}

// ---------------------------------------------------------------- train ----

int run_train(const std::string& algo, const DataOpts& data_opts, const HyperOpts& hyper,
              const std::string& out, const std::string& report_path) {
  const Dataset data = load_data(data_opts);
  const Hyperparams hp = make_hp(hyper, data.L);
  const TrainResult res = dispatch_train(algo, data, hp);
  save_model(res.model, out);

  std::ofstream trace(out + ".trace");
  char buf[128];
  for (const OuterRecord& r : res.trace.records) {
    std::snprintf(buf, sizeof(buf), "iter=%d objective=%.17g delta_wtilde=%.17g", r.iter,
                  r.objective, r.delta_barometer);
    trace << buf << " w_epochs=" << r.w_epochs << " d_epochs=" << r.d_epochs;
    std::snprintf(buf, sizeof(buf), " seconds=%.3f\n", r.seconds);
    trace << buf;
  }

  json j;
  j["command"] = "train";
  j["algorithm"] = algo;
  j["dataset"] = data_opts.path;
  j["model"] = out;
  j["seed"] = hp.seed;
  j["converged"] = res.trace.converged;
  j["outer_iters"] = res.trace.records.size();
  if (!res.trace.records.empty()) j["objective"] = res.trace.records.back().objective;
  j["seconds"] = res.trace.total_seconds;
  write_json(report_path, j);

  std::cout << "trained " << algo << " on " << data.n << " examples (d=" << data.d
            << ", L=" << data.L << "), " << res.trace.records.size() << " outer iterations, "
            << (res.trace.converged ? "converged" : "NOT converged") << "\n";
  return res.trace.converged ? kExitOk : kExitNotConverged;
}

// -------------------------------------------------------------- predict ----

int run_predict(const std::string& model_path, const DataOpts& data_opts,
                const std::string& out) {
  const Model m = load_model(model_path);
  const Dataset data = load_data(data_opts);
  if (data.n > 0 && data.d != m.d()) {
    std::cerr << "dimension mismatch: model expects d=" << m.d() << ", data has d=" << data.d
              << "\n";
    return kExitUsage;
  }
  std::ofstream os(out);
  if (!os) throw IoError("cannot open output " + out);
  char buf[40];
  for (int j = 0; j < data.n; ++j) {
    const std::vector<double> scores = predict_scores(m, data.features[j]);
    const std::vector<std::int8_t> labels = predict_labels(scores);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", scores[i]);
      os << (i ? " " : "") << buf;
    }
    os << " |";
    for (std::int8_t v : labels) os << ' ' << (v > 0 ? "+1" : "-1");
    os << '\n';
  }
  return kExitOk;
}

// ----------------------------------------------------------------- eval ----

struct Combo {
  double gamma2;
  double cost;
  int k;
};

std::vector<Combo> make_grid(const std::string& algo, const HyperOpts& hyper,
                             const std::vector<double>& g2_grid,
                             const std::vector<double>& c_grid, const std::vector<int>& k_grid,
                             int L) {
  std::vector<double> g2 = g2_grid;
  std::vector<double> cs = c_grid;
  std::vector<int> ks = k_grid;
  if (g2.empty()) g2 = {hyper.gamma2};
  if (cs.empty()) cs = {hyper.cost};
  if (ks.empty()) ks = {auto_k(hyper.k, L)};
  if (algo == "br" || algo == "lowrank") g2 = {hyper.gamma2};  // no correcting term
  if (algo == "br" || algo == "prbr") ks = {auto_k(hyper.k, L)};  // k unused / pinned
  std::vector<Combo> grid;
  for (int k : ks)
    for (double g : g2)
      for (double c : cs) grid.push_back({g, c, k});
  return grid;
}

int run_eval(const std::string& algo, const DataOpts& data_opts, const HyperOpts& hyper,
             int trials, double split_fraction, const std::vector<double>& g2_grid,
             const std::vector<double>& c_grid, const std::vector<int>& k_grid,
             const std::string& report_path) {
  const Dataset data = load_data(data_opts);
  const std::vector<Combo> grid =
      make_grid(algo, hyper, g2_grid, c_grid, k_grid, data.L);

  json jtrials = json::array();
  std::vector<EvalReport> reports;
  bool all_converged = true;

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = mix_seed(static_cast<std::uint64_t>(hyper.seed), t);
    const auto [train_half, test_half] = split(data, split_fraction, trial_seed);

    Combo chosen = grid.front();
    if (grid.size() > 1) {
      const auto [fit, val] = split(train_half, 0.8, mix_seed(trial_seed, 0x8020));
      double best_ap = -1.0;
      for (const Combo& combo : grid) {
        HyperOpts ho = hyper;
        ho.gamma2 = combo.gamma2;
        ho.cost = combo.cost;
        ho.k = combo.k;
        ho.seed = static_cast<std::int64_t>(mix_seed(trial_seed, 0xF17));
        Hyperparams hp = make_hp(ho, fit.L);
        const TrainResult fit_res = dispatch_train(algo, fit, hp);
        const EvalReport rep = eval_model(fit_res.model, val);
        if (rep.average_precision > best_ap) {
          best_ap = rep.average_precision;
          chosen = combo;
        }
      }
    }

    HyperOpts ho = hyper;
    ho.gamma2 = chosen.gamma2;
    ho.cost = chosen.cost;
    ho.k = chosen.k;
    ho.seed = static_cast<std::int64_t>(mix_seed(trial_seed, 0x7EA1));
    const Hyperparams hp = make_hp(ho, train_half.L);
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult res = dispatch_train(algo, train_half, hp);
    const double train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const EvalReport rep = eval_model(res.model, test_half);
    reports.push_back(rep);
    all_converged = all_converged && res.trace.converged;

    json jt;
    jt["trial"] = t;
    jt["seed"] = trial_seed;
    jt["selected"] = {{"gamma2", chosen.gamma2}, {"cost", chosen.cost}, {"k", chosen.k}};
    jt["converged"] = res.trace.converged;
    jt["seconds"] = train_seconds;
    jt["metrics"] = metrics_json(rep);
    jtrials.push_back(jt);

    std::cout << "trial " << t << ": gamma2=" << chosen.gamma2 << " cost=" << chosen.cost
              << " k=" << chosen.k << " ap=" << rep.average_precision
              << " rloss=" << rep.ranking_loss << " hamming=" << rep.hamming_loss << "\n";
  }

  const std::vector<MetricAggregate> agg = aggregate_reports(reports);
  std::cout << "aggregate over " << trials << " trial(s):\n";
  for (const MetricAggregate& a : agg)
    std::cout << "  " << a.name << " " << a.mean << " +/- " << a.stddev << "\n";

  json j;
  j["command"] = "eval";
  j["algorithm"] = algo;
  j["dataset"] = data_opts.path;
  j["seed"] = hyper.seed;
  j["trials"] = jtrials;
  json jagg;
  for (const MetricAggregate& a : agg) jagg[a.name] = {{"mean", a.mean}, {"std", a.stddev}};
  j["aggregate"] = jagg;
  write_json(report_path, j);
  return all_converged ? kExitOk : kExitNotConverged;
}

// --------------------------------------------------------------- ablate ----

int run_ablate(const DataOpts& data_opts, const HyperOpts& hyper, int trials,
               double split_fraction, std::vector<int> pool_grid,
               const std::string& report_path) {
  const Dataset data = load_data(data_opts);
  if (pool_grid.empty())
    pool_grid = {1, std::max(1, data.L / 2), std::max(1, data.L - 1)};
  for (int k : pool_grid)
    if (k < 1 || k > data.L - 1)
      throw ValidationError("ablate: pool size " + std::to_string(k) + " out of range");

  json jrows = json::array();
  // aggregate[algo][K] -> reports
  std::vector<std::vector<EvalReport>> prml_reports(pool_grid.size());
  std::vector<EvalReport> lowrank_reports;

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = mix_seed(static_cast<std::uint64_t>(hyper.seed), t);
    const auto [train_half, test_half] = split(data, split_fraction, trial_seed);

    HyperOpts ho = hyper;
    ho.seed = static_cast<std::int64_t>(mix_seed(trial_seed, 0xAB1A7E));
    const Hyperparams hp_low = make_hp(ho, train_half.L);
    const TrainResult low = train_lowrank(train_half, hp_low);
    const EvalReport low_rep = eval_model(low.model, test_half);
    lowrank_reports.push_back(low_rep);

    for (std::size_t gi = 0; gi < pool_grid.size(); ++gi) {
      HyperOpts hoK = ho;
      hoK.pool_size = pool_grid[gi];
      const Hyperparams hp = make_hp(hoK, train_half.L);
      const TrainResult res = train_prml(train_half, hp);
      const EvalReport rep = eval_model(res.model, test_half);
      prml_reports[gi].push_back(rep);
      json row;
      row["algo"] = "prml";
      row["pool_size"] = pool_grid[gi];
      row["trial"] = t;
      row["metrics"] = metrics_json(rep);
      jrows.push_back(row);
    }
    for (int k : pool_grid) {
      json row;
      row["algo"] = "lowrank";
      row["pool_size"] = k;  // constant across K: pools are unused
      row["trial"] = t;
      row["metrics"] = metrics_json(low_rep);
      jrows.push_back(row);
    }
  }

  json jagg = json::array();
  std::cout << "pool-size sweep (" << trials << " trial(s)):\n";
  for (std::size_t gi = 0; gi < pool_grid.size(); ++gi) {
    const auto agg = aggregate_reports(prml_reports[gi]);
    json ja;
    ja["algo"] = "prml";
    ja["pool_size"] = pool_grid[gi];
    for (const MetricAggregate& a : agg) ja["metrics"][a.name] = {{"mean", a.mean}, {"std", a.stddev}};
    jagg.push_back(ja);
    std::cout << "  prml K=" << pool_grid[gi];
    for (const MetricAggregate& a : agg)
      if (a.name == "average_precision" || a.name == "ranking_loss")
        std::cout << ' ' << a.name << '=' << a.mean;
    std::cout << "\n";
  }
  {
    const auto agg = aggregate_reports(lowrank_reports);
    for (int k : pool_grid) {
      json ja;
      ja["algo"] = "lowrank";
      ja["pool_size"] = k;
      for (const MetricAggregate& a : agg) ja["metrics"][a.name] = {{"mean", a.mean}, {"std", a.stddev}};
      jagg.push_back(ja);
    }
    std::cout << "  lowrank (pool-independent)";
    for (const MetricAggregate& a : agg)
      if (a.name == "average_precision" || a.name == "ranking_loss")
        std::cout << ' ' << a.name << '=' << a.mean;
    std::cout << "\n";
  }

  json j;
  j["command"] = "ablate";
  j["dataset"] = data_opts.path;
  j["seed"] = hyper.seed;
  j["pool_grid"] = pool_grid;
  j["rows"] = jrows;
  j["aggregate"] = jagg;
  write_json(report_path, j);
  return kExitOk;
}

// ------------------------------------------------------------- selftest ----

int run_selftest(const std::string& suite, bool inject_fault, const std::string& report_path) {
  std::vector<SuiteResult> results;
  if (suite == "all" || suite == "qp") results.push_back(run_qp_suite(100, 42, inject_fault));
  if (suite == "all" || suite == "kkt") results.push_back(run_kkt_suite());
  if (suite == "all" || suite == "uniqueness") results.push_back(run_uniqueness_suite());
  if (suite == "all" || suite == "metrics") results.push_back(run_metrics_suite());
  if (results.empty()) {
    std::cerr << "unknown suite '" << suite << "'\n";
    return kExitUsage;
  }

  bool ok = true;
  json jsuites = json::array();
  for (const SuiteResult& r : results) {
    std::printf("suite %-11s %4d passed, %d failed (%.1fs)\n", r.name.c_str(), r.passed,
                r.failed, r.seconds);
    for (const std::string& f : r.failures) std::printf("    %s\n", f.c_str());
    ok = ok && r.ok();
    jsuites.push_back({{"name", r.name}, {"passed", r.passed}, {"failed", r.failed}});
  }
  json j;
  j["command"] = "selftest";
  j["suites"] = jsuites;
  write_json(report_path, j);
  return ok ? kExitOk : kExitSelftestFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privileged multi-label learning toolkit"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a model and save it");
  std::string train_algo = "prml";
  DataOpts train_data;
  HyperOpts train_hyper;
  std::string train_out, train_report;
  train->add_option("--algo", train_algo, "prml | prbr | br | lowrank")
      ->check(CLI::IsMember({"prml", "prbr", "br", "lowrank"}));
  add_data_opts(train, train_data, "--data", true);
  add_hyper_opts(train, train_hyper);
  train->add_option("--out", train_out, "model output path")->required();
  train->add_option("--report", train_report, "JSON report path");

  // predict
  auto* predict = app.add_subcommand("predict", "score a dataset with a saved model");
  std::string predict_model, predict_out;
  DataOpts predict_data;
  predict->add_option("--model", predict_model, "model file")->required();
  add_data_opts(predict, predict_data, "--data", true);
  predict->add_option("--out", predict_out, "scores/labels output path")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "split/train/evaluate trials");
  std::string eval_algo = "prml";
  DataOpts eval_data;
  HyperOpts eval_hyper;
  int eval_trials = 1;
  double eval_split = 0.5;
  std::vector<double> eval_g2_grid, eval_c_grid;
  std::vector<int> eval_k_grid;
  std::string eval_report;
  eval_cmd->add_option("--algo", eval_algo, "prml | prbr | br | lowrank")
      ->check(CLI::IsMember({"prml", "prbr", "br", "lowrank"}));
  add_data_opts(eval_cmd, eval_data, "--data", true);
  add_hyper_opts(eval_cmd, eval_hyper);
  eval_cmd->add_option("--trials", eval_trials, "independent split/train/eval trials");
  eval_cmd->add_option("--split", eval_split, "train fraction of each split");
  eval_cmd->add_option("--gamma2-grid", eval_g2_grid, "tuning grid for gamma2")
      ->delimiter(',');
  eval_cmd->add_option("--cost-grid", eval_c_grid, "tuning grid for C")->delimiter(',');
  eval_cmd->add_option("--k-grid", eval_k_grid, "tuning grid for k")->delimiter(',');
  eval_cmd->add_option("--report", eval_report, "JSON report path");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "pool-size sweep: prml vs lowrank");
  DataOpts ablate_data;
  HyperOpts ablate_hyper;
  int ablate_trials = 1;
  double ablate_split = 0.5;
  std::vector<int> ablate_pool_grid;
  std::string ablate_report;
  add_data_opts(ablate, ablate_data, "--data", true);
  add_hyper_opts(ablate, ablate_hyper);
  ablate->add_option("--trials", ablate_trials, "independent trials (seeds)");
  ablate->add_option("--split", ablate_split, "train fraction");
  ablate->add_option("--pool-grid", ablate_pool_grid, "pool sizes to sweep")->delimiter(',');
  ablate->add_option("--report", ablate_report, "JSON report path");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "run the oracle property suites");
  std::string selftest_suite = "all";
  bool selftest_fault = false;
  std::string selftest_report;
  selftest->add_option("--suite", selftest_suite, "all | qp | kkt | uniqueness | metrics");
  selftest->add_flag("--inject-fault", selftest_fault, "negative control: force a failure")
      ->group("");  // hidden
  selftest->add_option("--report", selftest_report, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train)
      return run_train(train_algo, train_data, train_hyper, train_out, train_report);
    if (*predict) return run_predict(predict_model, predict_data, predict_out);
    if (*eval_cmd)
      return run_eval(eval_algo, eval_data, eval_hyper, eval_trials, eval_split, eval_g2_grid,
                      eval_c_grid, eval_k_grid, eval_report);
    if (*ablate)
      return run_ablate(ablate_data, ablate_hyper, ablate_trials, ablate_split,
                        ablate_pool_grid, ablate_report);
    if (*selftest) return run_selftest(selftest_suite, selftest_fault, selftest_report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
