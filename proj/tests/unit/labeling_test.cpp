#include "tslab/indicators.hpp"
#include "tslab/labeling.hpp"
#include "tslab/ols.hpp"
#include "tslab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace tslab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<Eigen::Index> range(Eigen::Index a, Eigen::Index b) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(b - a));
  std::iota(v.begin(), v.end(), a);
  return v;
}

Eigen::VectorXd walk(Rng& rng, Eigen::Index n, double start = 100.0) {
  Eigen::VectorXd c(n);
  c[0] = start;
  for (Eigen::Index i = 1; i < n; ++i) c[i] = c[i - 1] * std::exp(0.01 * rng.normal());
  return c;
}

}  // namespace

TEST(LabelNbar, HandValues) {
  const Eigen::VectorXd c = vec({100, 103, 105});
  EXPECT_EQ(label_nbar(c, {0}, 2, LabelFamily::nbar_updown).values[0], 1.0);
  EXPECT_DOUBLE_EQ(label_nbar(c, {0}, 2, LabelFamily::nbar_change).values[0], 5.0);
  EXPECT_DOUBLE_EQ(label_nbar(c, {0}, 2, LabelFamily::nbar_logret).values[0], std::log(1.05));
}

TEST(LabelNbar, TieGoesDown) {
  const Eigen::VectorXd c = vec({100, 101, 100});
  EXPECT_EQ(label_nbar(c, {0}, 2, LabelFamily::nbar_updown).values[0], 0.0);
  EXPECT_EQ(label_nbar(c, {0}, 2, LabelFamily::nbar_change).values[0], 0.0);
  EXPECT_EQ(label_nbar(c, {0}, 2, LabelFamily::nbar_logret).values[0], 0.0);
}

TEST(LabelNbar, BruteForce) {
  Rng rng(12);
  const Eigen::VectorXd c = walk(rng, 300);
  const auto ends = range(19, 295);
  const auto up = label_nbar(c, ends, 5, LabelFamily::nbar_updown);
  EXPECT_EQ(up.class_count, 2);
  for (std::size_t k = 0; k < ends.size(); ++k) {
    EXPECT_EQ(up.class_of(static_cast<Eigen::Index>(k)), c[ends[k] + 5] > c[ends[k]] ? 1 : 0);
  }
  EXPECT_THROW(label_nbar(c, {296}, 5, LabelFamily::nbar_updown), std::invalid_argument);
}

TEST(LabelMa, RisingAndConstant) {
  const Eigen::VectorXd up = Eigen::VectorXd::LinSpaced(60, 1, 60);
  const auto a = label_ma(up, range(19, 55), 5, 20);
  EXPECT_EQ(a.values, Eigen::VectorXd::Ones(36));
  const auto b = label_ma(Eigen::VectorXd::Constant(60, 7.0), range(19, 55), 5, 20);
  EXPECT_EQ(b.values, Eigen::VectorXd::Zero(36));
}

TEST(LabelMa, Oracle) {
  Rng rng(13);
  const Eigen::VectorXd c = walk(rng, 200);
  const auto ends = range(19, 190);
  const auto l = label_ma(c, ends, 3, 10);
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const Eigen::Index t = ends[k];
    const double now = c.segment(t - 9, 10).mean();
    const double later = c.segment(t + 3 - 9, 10).mean();
    EXPECT_EQ(l.class_of(static_cast<Eigen::Index>(k)), later > now ? 1 : 0);
  }
}

TEST(LabelPctq, AnchorValues) {
  // C_t = 100 then future highs/lows spanning [95, 115].
  const Eigen::VectorXd c = vec({100, 104, 110});
  const Eigen::VectorXd h = vec({100, 115, 112});
  const Eigen::VectorXd l = vec({100, 95, 101});
  EXPECT_DOUBLE_EQ(label_pctq(h, l, c, {0}, 2).values[0], 0.75);

  const Eigen::VectorXd rise = vec({100, 101, 102, 103});
  EXPECT_DOUBLE_EQ(label_pctq(rise, rise, rise, {0}, 3).values[0], 1.0);

  const Eigen::VectorXd h2 = vec({100, 110, 105});
  const Eigen::VectorXd l2 = vec({100, 99, 90});
  EXPECT_DOUBLE_EQ(label_pctq(h2, l2, c, {0}, 2).values[0], 0.5);
}

TEST(LabelPctq, FlatWindowWarns) {
  const Eigen::VectorXd f = Eigen::VectorXd::Constant(4, 5.0);
  const auto q = label_pctq(f, f, f, {0}, 3);
  EXPECT_DOUBLE_EQ(q.values[0], 0.5);
  EXPECT_FALSE(q.warnings.empty());
}

TEST(LabelPctq, BruteForceScan) {
  Rng rng(14);
  const Eigen::VectorXd c = walk(rng, 400);
  Eigen::VectorXd h(400), l(400);
  for (Eigen::Index i = 0; i < 400; ++i) {
    h[i] = c[i] * (1 + 0.005 * std::abs(rng.normal()));
    l[i] = c[i] * (1 - 0.005 * std::abs(rng.normal()));
  }
  const auto ends = range(0, 380);
  const auto q = label_pctq(h, l, c, ends, 20);
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const Eigen::Index t = ends[k];
    double hh = -1e300, ll = 1e300;
    for (Eigen::Index j = t + 1; j <= t + 20; ++j) {
      hh = std::max(hh, h[j]);
      ll = std::min(ll, l[j]);
    }
    const double expected = std::clamp((hh - c[t]) / (hh - ll), 0.0, 1.0);
    EXPECT_NEAR(q.values[static_cast<Eigen::Index>(k)], expected, 1e-12);
  }
}

TEST(LabelQclass, TableBoundaries) {
  LabelVector q;
  q.family = LabelFamily::pctq;
  q.values = vec({0.6, 0.5, 0.4, 0.61, 0.39, 1.0, 0.0});
  q.end_indices = range(0, 7);
  const auto c = label_qclass(q);
  EXPECT_EQ(c.classes(), (std::vector<int>{0, 1, 2, 0, 2, 0, 2}));
  EXPECT_EQ(c.class_count, 3);
  EXPECT_EQ(c.histogram(), (std::vector<Eigen::Index>{3, 1, 3}));
  EXPECT_THROW(label_qclass(q, {0.4, 0.6}), std::invalid_argument);
}

TEST(LabelTrend, ExactLine) {
  Eigen::VectorXd c(11);
  for (Eigen::Index i = 0; i <= 10; ++i) c[i] = 100.0 + static_cast<double>(i);
  const auto s = label_trend(c, {0}, 10, TrendMethod::regression, LabelFamily::trend_strength);
  EXPECT_NEAR(s.values[0], 0.01, 1e-14);
  const auto d = label_trend(c, {0}, 10, TrendMethod::regression, LabelFamily::trend_direction);
  EXPECT_EQ(d.values[0], 1.0);
}

TEST(LabelTrend, Constant) {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(40, 50.0);
  const auto r = label_trend(c, {25}, 10, TrendMethod::regression, LabelFamily::trend_strength);
  EXPECT_NEAR(r.values[0], 0.0, 1e-15);
  const auto f = label_trend(c, {25}, 10, TrendMethod::ma_fraction, LabelFamily::trend_strength, 20);
  EXPECT_EQ(f.values[0], 0.0);
  EXPECT_EQ(label_trend(c, {25}, 10, TrendMethod::ma_fraction, LabelFamily::trend_direction, 20).values[0], 0.0);
  EXPECT_EQ(label_trend(c, {25}, 10, TrendMethod::regression, LabelFamily::trend_direction).values[0], 0.0);
}

TEST(LabelTrend, OlsOracle) {
  Rng rng(15);
  const Eigen::VectorXd c = walk(rng, 200);
  const auto ends = range(30, 180);
  const auto s = label_trend(c, ends, 15, TrendMethod::regression, LabelFamily::trend_strength);
  Eigen::MatrixXd x(15, 2);
  for (Eigen::Index j = 0; j < 15; ++j) {
    x(j, 0) = 1.0;
    x(j, 1) = static_cast<double>(j + 1);
  }
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const Eigen::Index t = ends[k];
    const double slope = ols(x, c.segment(t + 1, 15)).coefficients[1];
    EXPECT_NEAR(s.values[static_cast<Eigen::Index>(k)], slope / c[t], 1e-9);
  }
}

TEST(LabelTrend, MaFractionOracle) {
  Rng rng(16);
  const Eigen::VectorXd c = walk(rng, 200);
  const Eigen::VectorXd m = sma(c, 10).values;
  const auto ends = range(30, 180);
  const auto s = label_trend(c, ends, 8, TrendMethod::ma_fraction, LabelFamily::trend_strength, 10);
  for (std::size_t k = 0; k < ends.size(); ++k) {
    int above = 0;
    for (Eigen::Index j = ends[k] + 1; j <= ends[k] + 8; ++j) above += c[j] > m[j];
    EXPECT_DOUBLE_EQ(s.values[static_cast<Eigen::Index>(k)], above / 8.0);
  }
}

TEST(ProbeConditions, Monotone) {
  const Eigen::VectorXd up = Eigen::VectorXd::LinSpaced(40, 1, 40);
  const Eigen::VectorXd down = Eigen::VectorXd::LinSpaced(40, 40, 1);
  for (auto cond : {ProbeCondition::close_above_close5, ProbeCondition::close_above_ema5,
                    ProbeCondition::close_above_hc10}) {
    EXPECT_EQ(label_probe_conditions(up, range(10, 40), cond).values, Eigen::VectorXd::Ones(30));
    EXPECT_EQ(label_probe_conditions(down, range(10, 40), cond).values, Eigen::VectorXd::Zero(30));
  }
}

TEST(ProbeConditions, BruteForce) {
  Rng rng(17);
  const Eigen::VectorXd c = walk(rng, 300);
  const auto ends = range(19, 300);
  const auto c5 = label_probe_conditions(c, ends, ProbeCondition::close_above_close5);
  const auto e5 = label_probe_conditions(c, ends, ProbeCondition::close_above_ema5);
  const auto h10 = label_probe_conditions(c, ends, ProbeCondition::close_above_hc10);
  // Independent EMA recursion.
  Eigen::VectorXd ema5(300);
  ema5[4] = c.head(5).mean();
  for (Eigen::Index i = 5; i < 300; ++i) ema5[i] = c[i] / 3.0 + ema5[i - 1] * 2.0 / 3.0;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const Eigen::Index t = ends[k];
    const auto i = static_cast<Eigen::Index>(k);
    EXPECT_EQ(c5.class_of(i), c[t] > c[t - 5] ? 1 : 0);
    EXPECT_EQ(e5.class_of(i), c[t] > ema5[t] ? 1 : 0);
    double hc = c[t - 9];
    for (Eigen::Index j = t - 9; j < t; ++j) hc = std::max(hc, c[j]);
    EXPECT_EQ(h10.class_of(i), c[t] > hc ? 1 : 0);
  }
  EXPECT_THROW(label_probe_conditions(c, {8}, ProbeCondition::close_above_hc10), std::invalid_argument);
}

TEST(Parsing, NamesRoundTrip) {
  for (auto f : {LabelFamily::nbar_updown, LabelFamily::nbar_change, LabelFamily::nbar_logret, LabelFamily::ma_updown,
                 LabelFamily::trend_strength, LabelFamily::trend_direction, LabelFamily::pctq, LabelFamily::qclass}) {
    EXPECT_EQ(parse_label_family(to_string(f)), f);
  }
  EXPECT_EQ(parse_probe_condition("hc10"), ProbeCondition::close_above_hc10);
  EXPECT_THROW(parse_label_family("zigzag"), std::invalid_argument);
}
