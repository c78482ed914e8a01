#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace diesel {

// Right-continuous empirical CDF on the sorted samples; the fraction at the
// largest sample is 1.  Duplicates collapse into a single step.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);

// Mean of the last half of the series (steady-state proxy).
double steady_state_mean(const std::vector<double>& series);

// First tick after which the series stays within factor * steady; 0 when the
// whole series already does.
int settling_tick(const std::vector<double>& series, double steady, double factor = 1.5);

// Aggregated per-method output of one experiment.
struct MetricSeries {
  std::vector<std::string> methods;
  int ticks = 0;
  std::map<std::string, std::vector<double>> mean_error;    // [method][tick], m
  std::map<std::string, std::vector<double>> std_error;     // sample std over trials
  std::map<std::string, std::vector<double>> trial_errors;  // per-trial grand means
  std::map<std::string, int> divergence_count;
  std::map<std::string, int> trials_used;
};

}  // namespace diesel
