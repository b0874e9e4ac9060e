#pragma once

#include <cstddef>
#include <span>

namespace sdfkit {

/// Pairwise summation over a fixed binary tree (leaves of at most 8 values),
/// so the result depends only on the data order, never on scheduling.
double pairwise_sum(std::span<const double> values);

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t n = 0;
};

/// Two-pass mean and standard error. Identical samples yield an exact mean and
/// zero standard error.
SampleStats sample_stats(std::span<const double> values);

}  // namespace sdfkit
