#pragma once

#include <string>
#include <vector>

#include "privml/metrics.hpp"

namespace privml {

struct MetricAggregate {
  std::string name;
  double mean = 0;
  double stddev = 0;  // sample standard deviation, 0 for a single trial
};

std::vector<MetricAggregate> aggregate_reports(const std::vector<EvalReport>& reports);

// Flat `key value` lines, one metric per line plus counts.
std::string report_kv_lines(const EvalReport& rep);

}  // namespace privml
