#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tsql/error.hpp"
#include "tsql/logsumexp.hpp"
#include "tsql/random.hpp"

using namespace tsql;

TEST(LogSumExp, SingletonIsIdentity) {
  for (double n : {0.1, 1.0, 1e4}) {
    const std::vector<double> v{3.25};
    EXPECT_EQ(stable_logsumexp(v, n), 3.25);
  }
}

TEST(LogSumExp, EqualEntries) {
  const std::vector<double> v{2, 2, 2};
  EXPECT_NEAR(stable_logsumexp(v, 1.0), 2.0 + std::log(3.0), 1e-12);
  EXPECT_NEAR(stable_logsumexp(v, 1.0), 3.0986, 1e-4);
}

TEST(LogSumExp, LargeValuesDoNotOverflow) {
  const std::vector<double> v{1000, 1000};
  const double r = stable_logsumexp(v, 10000.0);
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_NEAR(r, 1000.0 + std::log(2.0) / 10000.0, 1e-12);
  const std::vector<double> w{1e6, -1e6, 1e6};
  EXPECT_TRUE(std::isfinite(stable_logsumexp(w, 1e6)));
}

TEST(LogSumExp, Errors) {
  EXPECT_THROW(stable_logsumexp(std::vector<double>{}, 1.0), ParameterError);
  EXPECT_THROW(stable_logsumexp(std::vector<double>{1.0}, 0.0), ParameterError);
  EXPECT_THROW(stable_logsumexp(std::vector<double>{1.0}, -1.0), ParameterError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(stable_logsumexp(std::vector<double>{1.0, nan}, 1.0), NumericError);
}

TEST(LogSumExp, SandwichAndShiftInvariance) {
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(1 + rng.uniform_index(8));
    for (auto& x : v) x = 100.0 * (2.0 * rng.uniform() - 1.0);
    const double n = std::pow(10.0, 6.0 * rng.uniform() - 2.0);
    const double mx = *std::max_element(v.begin(), v.end());
    const double l = stable_logsumexp(v, n);
    ASSERT_GE(l, mx - 1e-12);
    ASSERT_LE(l, mx + std::log(static_cast<double>(v.size())) / n + 1e-12);

    const double s = 50.0 * (2.0 * rng.uniform() - 1.0);
    std::vector<double> shifted(v);
    for (auto& x : shifted) x += s;
    ASSERT_NEAR(stable_logsumexp(shifted, n), l + s, 1e-10);
  }
}
