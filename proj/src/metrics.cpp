#include "diesel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diesel {

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical_cdf: empty sample set");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<std::pair<double, double>> points;
  for (size_t i = 0; i < samples.size(); ++i) {
    const bool last_of_value = (i + 1 == samples.size()) || (samples[i + 1] != samples[i]);
    if (last_of_value) points.emplace_back(samples[i], static_cast<double>(i + 1) / n);
  }
  return points;
}

double steady_state_mean(const std::vector<double>& series) {
  if (series.empty()) throw std::invalid_argument("steady_state_mean: empty series");
  const size_t start = series.size() / 2;
  double sum = 0.0;
  for (size_t t = start; t < series.size(); ++t) sum += series[t];
  return sum / static_cast<double>(series.size() - start);
}

int settling_tick(const std::vector<double>& series, double steady, double factor) {
  int settle = 0;
  for (size_t t = 0; t < series.size(); ++t)
    if (series[t] > factor * steady) settle = static_cast<int>(t) + 1;
  return settle;
}

}  // namespace diesel
