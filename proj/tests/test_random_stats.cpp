#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdfkit/random.hpp"
#include "sdfkit/stats.hpp"

using namespace sdfkit;

TEST_CASE("philox known-answer vectors") {
  // Random123 kat_vectors for philox4x32_10
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal stream is reproducible and well-formed") {
  NormalStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);

  NormalStream s(1, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  int below = 0;
  for (int k = 0; k < n; ++k) {
    const double z = s.next();
    sum += z;
    sq += z * z;
    below += z < 1.0;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK(std::abs(below / double(n) - 0.8413447460685429) < 0.005);
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(std::isfinite(normal_quantile(0x1.0p-54)));
}

TEST_CASE("pairwise stats") {
  std::vector<double> v(1000, 0.1);
  const SampleStats same = sample_stats(v);
  CHECK(same.mean == 0.1);
  CHECK(same.std_error == 0.0);
  std::vector<double> w{1, 2, 3, 4};
  const SampleStats s = sample_stats(w);
  CHECK(s.mean == 2.5);
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(pairwise_sum(std::vector<double>(37, 1.0)) == 37.0);
}
