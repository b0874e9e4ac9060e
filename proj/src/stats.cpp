#include "sdfkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sdfkit {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats out;
  out.n = values.size();
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    out.mean = *lo;
    return out;
  }
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = values[i] - out.mean;
    sq[i] = dev * dev;
  }
  out.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return out;
}

}  // namespace sdfkit
