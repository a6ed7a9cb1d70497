#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "tsql/environments.hpp"
#include "tsql/error.hpp"
#include "tsql/random.hpp"
#include "tsql/updates.hpp"

using namespace tsql;

namespace {

QTable random_table(std::size_t S, std::size_t A, Rng& rng, double scale = 10.0) {
  QTable q(S, A);
  for (auto& v : q.values()) v = scale * (2.0 * rng.uniform() - 1.0);
  return q;
}

bool identical(const QTable& x, const QTable& y) {
  auto a = x.values();
  auto b = y.values();
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

int changed_entries(const QTable& before, const QTable& after) {
  int n = 0;
  for (std::size_t k = 0; k < before.values().size(); ++k)
    if (before.values()[k] != after.values()[k]) ++n;
  return n;
}

}  // namespace

TEST(QlUpdate, HandExamples) {
  QTable q(2, 2);
  ql_update(q, 0, 1, 1, 2.0, 0.0, 0.9);
  EXPECT_EQ(q(0, 1), 0.0);
  ql_update(q, 0, 1, 1, 2.0, 1.0, 0.9);
  EXPECT_DOUBLE_EQ(q(0, 1), 2.0);
  EXPECT_EQ(q.count(0, 1), 2u);

  QTable ones(2, 2, 1.0);
  ql_update(ones, 0, 0, 1, 0.0, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(ones(0, 0), 0.75);
}

TEST(QlUpdate, RejectsBadStepSize) {
  QTable q(1, 1);
  EXPECT_THROW(ql_update(q, 0, 0, 0, 0.0, 1.5, 0.5), ParameterError);
  EXPECT_THROW(ql_update(q, 0, 0, 0, 0.0, -0.1, 0.5), ParameterError);
  EXPECT_THROW(ql_update(q, 1, 0, 0, 0.0, 0.5, 0.5), IndexError);
}

TEST(TsqlUpdate, HandExample) {
  QTable q(3, 2);
  tsql_update(q, {0, 0, 1, 1.0, 0, 2, 2.0}, 1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(q(0, 0), 2.0);
}

TEST(TsqlUpdate, ReadsPreUpdateTable) {
  QTable q(2, 1, 1.0);
  // j = k = i: both max terms must read the old value 1.
  tsql_update(q, {0, 0, 0, 0.0, 0, 0, 0.0}, 1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(q(0, 0), 0.5 + 0.5 * 0.5);
}

TEST(TsqlUpdate, ZeroStaysZero) {
  QTable q(3, 2);
  tsql_update(q, {0, 1, 2, 0.0, 1, 0, 0.0}, 0.7, -0.4, 0.9);
  EXPECT_EQ(q.sup_norm(), 0.0);
}

TEST(TsqlUpdate, RejectsLargeTheta) {
  QTable q(1, 1);
  EXPECT_THROW(tsql_update(q, {0, 0, 0, 0.0, 0, 0, 0.0}, 0.5, 1.01, 0.5), ParameterError);
  EXPECT_THROW(tsql_update(q, {0, 0, 0, 0.0, 0, 0, 0.0}, 0.5, -1.01, 0.5), ParameterError);
}

TEST(Degeneracy, ThetaZeroAndUnitRelaxationMatchQl) {
  Rng rng(1);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t S = 1 + rng.uniform_index(5), A = 1 + rng.uniform_index(4);
    const QTable base = random_table(S, A, rng);
    const TwoStepSample s{rng.uniform_index(S), rng.uniform_index(A), rng.uniform_index(S),
                          rng.normal(),         rng.uniform_index(A), rng.uniform_index(S),
                          rng.normal()};
    const double alpha = rng.uniform(), beta = rng.uniform();
    QTable ql = base, two = base, sor = base;
    ql_update(ql, s.i, s.a, s.j, s.r1, alpha, beta);
    tsql_update(two, s, alpha, 0.0, beta);
    sorql_update(sor, s.i, s.a, s.j, s.r1, alpha, beta, 1.0);
    ASSERT_TRUE(identical(ql, two));
    ASSERT_TRUE(identical(ql, sor));
  }
}

TEST(StsqlUpdate, SingleActionMatchesTsql) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    QTable a = random_table(3, 1, rng), b = a;
    const TwoStepSample s{0, 0, rng.uniform_index(3), 1.0, 0, rng.uniform_index(3), -0.5};
    tsql_update(a, s, 0.3, 0.7, 0.9);
    stsql_update(b, s, 0.3, 0.7, 0.9, 5.0);
    ASSERT_TRUE(identical(a, b));
  }
}

TEST(StsqlUpdate, EqualEntriesClosedForm) {
  const double c = 1.3;
  QTable q(1, 2, c);
  stsql_update(q, {0, 0, 0, 0.0, 0, 0, 0.0}, 1.0, 0.0, 0.5, 1.0);
  EXPECT_NEAR(q(0, 0), 0.5 * (c + std::log(2.0)), 1e-12);
}

TEST(StsqlUpdate, CloseToTsql) {
  Rng rng(3);
  const double n = 10000.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t S = 4, A = 1 + rng.uniform_index(5);
    QTable hard = random_table(S, A, rng), smooth = hard;
    const TwoStepSample s{rng.uniform_index(S), rng.uniform_index(A), rng.uniform_index(S),
                          rng.normal(),         rng.uniform_index(A), rng.uniform_index(S),
                          rng.normal()};
    const double alpha = rng.uniform(), theta = 2.0 * rng.uniform() - 1.0,
                 beta = rng.uniform();
    tsql_update(hard, s, alpha, theta, beta);
    stsql_update(smooth, s, alpha, theta, beta, n);
    const double limit = alpha * beta * (1.0 + std::abs(theta) * beta) *
                         std::log(static_cast<double>(A)) / n;
    ASSERT_LE(std::abs(smooth(s.i, s.a) - hard(s.i, s.a)), limit + 1e-12);
  }
}

TEST(StsqlUpdate, RejectsBadTemperature) {
  QTable q(1, 2);
  EXPECT_THROW(stsql_update(q, {0, 0, 0, 0.0, 0, 0, 0.0}, 0.5, 0.5, 0.5, 0.0), ParameterError);
}

TEST(Updates, TouchExactlyOneEntry) {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    const QTable base = random_table(4, 3, rng);
    const TwoStepSample s{rng.uniform_index(4), rng.uniform_index(3), rng.uniform_index(4),
                          1.0,                  rng.uniform_index(3), rng.uniform_index(4),
                          -1.0};
    QTable a = base, b = base, c = base, d = base;
    ql_update(a, s.i, s.a, s.j, s.r1, 0.5, 0.9);
    tsql_update(b, s, 0.5, 0.5, 0.9);
    stsql_update(c, s, 0.5, 0.5, 0.9, 2.0);
    sorql_update(d, s.i, s.a, s.j, s.r1, 0.5, 0.9, 1.3);
    for (const QTable* q : {&a, &b, &c, &d}) ASSERT_LE(changed_entries(base, *q), 1);
  }
}

TEST(DoubleQ, ZeroStaysZero) {
  DoubleQState st(2, 2);
  Rng rng(5);
  for (int t = 0; t < 100; ++t) double_q_update(st, 0, 1, 1, 0.0, 0.5, 0.9, rng);
  EXPECT_EQ(st.qa.sup_norm(), 0.0);
  EXPECT_EQ(st.qb.sup_norm(), 0.0);
}

TEST(DoubleQ, CrossEvaluation) {
  DoubleQState st(2, 2);
  st.qb(1, 0) = 0.0;
  st.qb(1, 1) = 5.0;
  st.qa(1, 0) = 9.0;
  st.qa(1, 1) = 1.0;
  double_q_update_estimator(st, Estimator::a, 0, 0, 1, 0.0, 1.0, 1.0);
  EXPECT_EQ(st.qa(0, 0), 0.0);
  double_q_update_estimator(st, Estimator::b, 0, 0, 1, 0.0, 1.0, 1.0);
  EXPECT_EQ(st.qb(0, 0), 1.0);  // B's argmax is 1, evaluated by A
}

TEST(DoubleQ, SeededReplayAndSingleEntry) {
  Rng r1(6), r2(6);
  DoubleQState x(3, 2), y(3, 2);
  for (int t = 0; t < 1000; ++t) {
    const DoubleQState before = x;
    double_q_update(x, t % 3, t % 2, (t + 1) % 3, std::sin(t), 0.3, 0.9, r1);
    double_q_update(y, t % 3, t % 2, (t + 1) % 3, std::sin(t), 0.3, 0.9, r2);
    ASSERT_LE(changed_entries(before.qa, x.qa) + changed_entries(before.qb, x.qb), 1);
  }
  EXPECT_TRUE(identical(x.qa, y.qa));
  EXPECT_TRUE(identical(x.qb, y.qb));
}

TEST(DqAvg, DoubledStepSize) {
  Rng r1(7), r2(7);
  DoubleQState x(2, 2), y(2, 2);
  x.qa(1, 1) = 3.0;
  y.qa(1, 1) = 3.0;
  for (int t = 0; t < 200; ++t) {
    dq_avg_update(x, t % 2, (t / 2) % 2, 1, 1.0, 0.2, 0.9, r1);
    double_q_update(y, t % 2, (t / 2) % 2, 1, 1.0, 0.4, 0.9, r2);
  }
  EXPECT_TRUE(identical(x.qa, y.qa));
  EXPECT_TRUE(identical(x.qb, y.qb));

  DoubleQState z(1, 1);
  z.qa(0, 0) = 2.0;
  Rng r3(8);
  dq_avg_update(z, 0, 0, 0, 5.0, 0.0, 0.9, r3);
  EXPECT_EQ(z.qa(0, 0), 2.0);
  EXPECT_EQ(z.qb(0, 0), 0.0);
}

TEST(DqAvg, StepSizeClampedAtOne) {
  Rng r1(9), r2(9);
  DoubleQState x(1, 1), y(1, 1);
  dq_avg_update(x, 0, 0, 0, 1.0, 0.8, 0.5, r1);
  double_q_update(y, 0, 0, 0, 1.0, 1.0, 0.5, r2);
  EXPECT_TRUE(identical(x.qa, y.qa));
  EXPECT_TRUE(identical(x.qb, y.qb));
}

TEST(DqAvg, AveragedTableRead) {
  DoubleQState st(1, 2);
  st.qa(0, 0) = 0.0;
  st.qa(0, 1) = 2.0;
  st.qb(0, 0) = 4.0;
  st.qb(0, 1) = 0.0;
  const QTable avg = st.average();
  EXPECT_EQ(avg(0, 0), 2.0);
  EXPECT_EQ(avg(0, 1), 1.0);
  EXPECT_EQ(greedy_action(avg.row(0)), 0u);
}

TEST(Sorql, HandExample) {
  QTable q(2, 2);
  q(0, 1) = 4.0;
  q(1, 0) = 2.0;
  sorql_update(q, 0, 0, 1, 1.0, 1.0, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(q(0, 0), 3.0);
}

TEST(Sorql, ZeroAndErrors) {
  QTable q(2, 2);
  sorql_update(q, 0, 0, 1, 0.0, 0.5, 0.5, 1.4);
  EXPECT_EQ(q.sup_norm(), 0.0);
  EXPECT_THROW(sorql_update(q, 0, 0, 1, 0.0, 0.5, 0.5, 0.0), ParameterError);
  EXPECT_THROW(sorql_update(q, 0, 0, 1, 0.0, 2.0, 0.5, 1.0), ParameterError);
}

TEST(Sorql, RelaxationWeightFromModel) {
  Rng rng(10);
  const auto mdp = generate_random_mdp(4, 2, rng, 0.25, 0.6);
  double min_self = 1.0;
  for (State i = 0; i < 4; ++i)
    for (Action a = 0; a < 2; ++a) min_self = std::min(min_self, mdp.probability(i, a, i));
  EXPECT_GE(min_self, 0.25);
  EXPECT_DOUBLE_EQ(sor_relaxation_weight(mdp), 1.0 / (1.0 - 0.6 * min_self));
  EXPECT_DOUBLE_EQ(sor_relaxation_weight(build_bias_mdp()), 1.0);
}
