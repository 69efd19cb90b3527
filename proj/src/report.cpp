#include "privml/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "privml/errors.hpp"

namespace privml {

std::vector<MetricAggregate> aggregate_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ValidationError("aggregate_reports: no reports");
  const auto names = reports.front().metric_values();
  std::vector<MetricAggregate> out;
  for (std::size_t mi = 0; mi < names.size(); ++mi) {
    MetricAggregate agg;
    agg.name = names[mi].first;
    double sum = 0.0;
    for (const EvalReport& r : reports) sum += r.metric_values()[mi].second;
    agg.mean = sum / reports.size();
    if (reports.size() > 1) {
      double ss = 0.0;
      for (const EvalReport& r : reports) {
        const double d = r.metric_values()[mi].second - agg.mean;
        ss += d * d;
      }
      agg.stddev = std::sqrt(ss / (reports.size() - 1));
    }
    out.push_back(agg);
  }
  return out;
}

std::string report_kv_lines(const EvalReport& rep) {
  std::ostringstream os;
  char buf[40];
  for (const auto& [name, v] : rep.metric_values()) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << name << ' ' << buf << '\n';
  }
  os << "n_eval " << rep.n_eval << '\n';
  os << "skipped_one_error " << rep.skipped_one_error << '\n';
  os << "skipped_coverage " << rep.skipped_coverage << '\n';
  os << "skipped_ranking_loss " << rep.skipped_ranking_loss << '\n';
  os << "skipped_average_precision " << rep.skipped_average_precision << '\n';
  os << "skipped_macro_auc " << rep.skipped_macro_auc << '\n';
  return os.str();
}

}  // namespace privml
