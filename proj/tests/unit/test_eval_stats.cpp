#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "synthqa/classification.hpp"
#include "synthqa/efficiency.hpp"
#include "synthqa/error.hpp"
#include "synthqa/intervals.hpp"
#include "synthqa/paired_tests.hpp"
#include "synthqa/random.hpp"

using namespace synthqa;

namespace {

constexpr double kZ975 = 1.959963984540054;

// One cube; `correct[s][i]` decides whether seed s predicts image i right.
// Wrong guesses take the next class.
PredictionCube make_cube(const std::string& name, const std::vector<TumourClass>& truth,
                         const std::vector<std::vector<bool>>& correct) {
  PredictionCube c;
  c.condition = name;
  for (std::size_t s = 0; s < correct.size(); ++s) c.seeds.push_back(static_cast<std::int64_t>(s));
  for (std::size_t i = 0; i < truth.size(); ++i) c.image_ids.push_back(fx::id_for("img", i));
  c.true_class = truth;
  for (const auto& row : correct)
    for (std::size_t i = 0; i < truth.size(); ++i)
      c.pred_class.push_back(row[i] ? truth[i] : kAllClasses[(static_cast<int>(truth[i]) + 1) % 4]);
  return c;
}

std::vector<TumourClass> cycle_truth(std::size_t n) {
  std::vector<TumourClass> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back(kAllClasses[i % 4]);
  return t;
}

double exact_sign_p(const std::vector<double>& d) {
  const std::size_t n = d.size();
  const double obs = std::abs(std::accumulate(d.begin(), d.end(), 0.0));
  double scale = 0;
  for (double v : d) scale += std::abs(v);
  std::size_t hits = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1) ? -d[i] : d[i];
    hits += std::abs(s) >= obs - 1e-9 * scale;
  }
  return static_cast<double>(hits) / static_cast<double>(1ull << n);
}

}  // namespace

TEST(Metrics, PerfectPredictions) {
  const auto cube = fx::random_cube("p", 1, 40, 1.0, 3);
  const auto m = metrics(cube, cube.seeds[0]);
  EXPECT_DOUBLE_EQ(m.tumour_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(m.weighted_f1, 1.0);
  EXPECT_DOUBLE_EQ(*m.plane_accuracy, 1.0);
  for (double f : m.per_class_f1) EXPECT_DOUBLE_EQ(f, 1.0);
}

TEST(Metrics, MajorityPredictorOnThreeClasses) {
  PredictionCube c;
  c.condition = "maj";
  c.seeds = {1};
  const TumourClass t[] = {TumourClass::glioma, TumourClass::meningioma, TumourClass::pituitary};
  for (std::size_t i = 0; i < 6; ++i) {
    c.image_ids.push_back(fx::id_for("img", i));
    c.true_class.push_back(t[i % 3]);
    c.pred_class.push_back(TumourClass::glioma);
  }
  const auto m = metrics(c, 1);
  EXPECT_NEAR(m.tumour_accuracy, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.macro_f1, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(m.weighted_f1, 1.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.per_class_f1[1], 0.0);
  EXPECT_DOUBLE_EQ(m.per_class_f1[2], 0.0);
  EXPECT_FALSE(m.plane_accuracy.has_value());
  EXPECT_THROW(m.get(Metric::plane_accuracy), ValidationError);
  EXPECT_THROW(metrics(c, 2), ValidationError);
}

TEST(Metrics, WeightedF1IsSupportWeighted) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto cube = fx::random_cube("r", 1, 57 + s, 0.6, s);
    const auto m = metrics(cube, cube.seeds[0]);
    std::array<double, 4> support{};
    for (auto t : cube.true_class) support[static_cast<std::size_t>(t)] += 1;
    double w = 0;
    for (std::size_t k = 0; k < 4; ++k) w += support[k] / cube.num_images() * m.per_class_f1[k];
    EXPECT_NEAR(m.weighted_f1, w, 1e-12);
  }
}

TEST(Metrics, NamesRoundTrip) {
  for (auto m : kAllMetrics) EXPECT_EQ(parse_metric(to_string(m)), m);
  EXPECT_FALSE(parse_metric("auc").has_value());
}

TEST(Permutation, IdenticalCubes) {
  const auto a = fx::random_cube("a", 3, 50, 0.8, 1);
  const auto r = paired_permutation(a, a, Metric::tumour_accuracy, {500, 42, 0});
  EXPECT_DOUBLE_EQ(r.delta_pp, 0.0);
  EXPECT_DOUBLE_EQ(r.p, 1.0);
}

TEST(Permutation, AgreesWithExactEnumeration) {
  auto rng = stream_engine(5, 0);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 10;
    std::vector<bool> ca(n), cb(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      ca[i] = coin_flip(rng);
      cb[i] = uniform_index(rng, 4) == 0;
      d[i] = double(ca[i]) - double(cb[i]);
    }
    const auto truth = cycle_truth(n);
    const auto a = make_cube("a", truth, {ca});
    const auto b = make_cube("b", truth, {cb});
    const std::size_t R = 5000;
    const auto r = paired_permutation(a, b, Metric::tumour_accuracy, {R, 42u + trial, 0});
    const double exact = exact_sign_p(d);
    EXPECT_NEAR(r.delta_pp, 100.0 * std::accumulate(d.begin(), d.end(), 0.0) / n, 1e-9);
    const double se = std::sqrt(exact * (1 - exact) / R);
    EXPECT_LE(std::abs(r.p - exact), 3 * se + 1.0 / R) << "trial " << trial;
  }
}

TEST(Permutation, DominatingConditionNearFloor) {
  const std::size_t n = 12;
  const auto truth = cycle_truth(n);
  const auto a = make_cube("a", truth, {std::vector<bool>(n, true), std::vector<bool>(n, true)});
  const auto b = make_cube("b", truth, {std::vector<bool>(n, false), std::vector<bool>(n, false)});
  const auto r = paired_permutation(a, b, Metric::tumour_accuracy, {5000, 42, 0});
  EXPECT_DOUBLE_EQ(r.delta_pp, 100.0);
  const double exact = 2.0 / 4096.0;
  EXPECT_LE(std::abs(r.p - exact), 3 * std::sqrt(exact / 5000) + 1.0 / 5001);

  const auto truth20 = cycle_truth(20);
  const auto a20 = make_cube("a", truth20, {std::vector<bool>(20, true)});
  const auto b20 = make_cube("b", truth20, {std::vector<bool>(20, false)});
  EXPECT_LT(paired_permutation(a20, b20, Metric::tumour_accuracy, {5000, 42, 0}).p, 5.0 / 5001);
}

TEST(Permutation, ThreadCountDoesNotMatter) {
  const auto a = fx::random_cube("a", 4, 80, 0.8, 10);
  const auto b = fx::random_cube("b", 4, 80, 0.7, 11);
  const auto one = paired_permutation(a, b, Metric::macro_f1, {1000, 9, 1});
  const auto four = paired_permutation(a, b, Metric::macro_f1, {1000, 9, 4});
  EXPECT_EQ(one.p, four.p);
  EXPECT_EQ(one.delta_pp, four.delta_pp);
  const auto bi1 = bootstrap_ci(a, b, Metric::macro_f1, {1000, 9, 1});
  const auto bi4 = bootstrap_ci(a, b, Metric::macro_f1, {1000, 9, 4});
  EXPECT_EQ(bi1.low_pp, bi4.low_pp);
  EXPECT_EQ(bi1.high_pp, bi4.high_pp);
}

TEST(Permutation, NullPValuesAreUniform) {
  std::vector<double> f1, acc;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto a = fx::random_cube("a", 3, 120, 0.7, 1000 + t);
    const auto b = fx::random_cube("b", 3, 120, 0.7, 5000 + t);
    f1.push_back(paired_permutation(a, b, Metric::macro_f1, {400, t, 0}).p);
    acc.push_back(paired_permutation(a, b, Metric::tumour_accuracy, {400, t, 0}).p);
  }
  std::sort(f1.begin(), f1.end());
  std::sort(acc.begin(), acc.end());
  double ks = 0, d_plus = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    ks = std::max({ks, (i + 1) / 200.0 - f1[i], f1[i] - i / 200.0});
    d_plus = std::max(d_plus, (i + 1) / 200.0 - acc[i]);
  }
  EXPECT_LT(ks, 1.63 / std::sqrt(200.0));
  // Discrete null: one-sided.
  EXPECT_LT(d_plus, 1.63 / std::sqrt(200.0));
}

TEST(Permutation, Mismatch) {
  const auto a = fx::random_cube("a", 2, 20, 0.8, 1);
  const auto b = fx::random_cube("b", 3, 20, 0.8, 1);
  EXPECT_THROW(paired_permutation(a, b, Metric::tumour_accuracy), ValidationError);
}

TEST(Bootstrap, IdenticalCubesGiveZeroInterval) {
  const auto a = fx::random_cube("a", 2, 40, 0.8, 2);
  const auto ci = bootstrap_ci(a, a, Metric::weighted_f1, {500, 1, 0});
  EXPECT_DOUBLE_EQ(ci.low_pp, 0.0);
  EXPECT_DOUBLE_EQ(ci.high_pp, 0.0);
}

TEST(Bootstrap, ConstantAdvantage) {
  // 100 seeds; on every image B misses exactly one seed that A gets right.
  const std::size_t n = 10, seeds = 100;
  const auto truth = cycle_truth(n);
  std::vector<std::vector<bool>> ca(seeds, std::vector<bool>(n, true)), cb = ca;
  for (std::size_t i = 0; i < n; ++i) cb[(i * 7) % seeds][i] = false;
  const auto ci = bootstrap_ci(make_cube("a", truth, ca), make_cube("b", truth, cb),
                               Metric::tumour_accuracy, {2000, 3, 0});
  EXPECT_NEAR(ci.low_pp, 1.0, 1e-9);
  EXPECT_NEAR(ci.high_pp, 1.0, 1e-9);
}

TEST(Bootstrap, MatchesEnumeratedDistribution) {
  const auto truth = cycle_truth(3);
  const auto a = make_cube("a", truth, {{true, true, false}});
  const auto b = make_cube("b", truth, {{false, true, false}});
  std::vector<double> all;
  const double d[] = {100, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) all.push_back((d[i] + d[j] + d[k]) / 3.0);
  std::sort(all.begin(), all.end());
  // Inverse-CDF quantiles of the 27 equally likely resamples.
  const auto inv = [&](double q) { return all[static_cast<std::size_t>(std::ceil(q * 27.0)) - 1]; };
  const auto ci = bootstrap_ci(a, b, Metric::tumour_accuracy, {5000, 42, 0});
  EXPECT_NEAR(ci.low_pp, inv(0.025), 1e-9);
  EXPECT_NEAR(ci.high_pp, inv(0.975), 1e-9);
  EXPECT_DOUBLE_EQ(inv(0.025), 0.0);
  EXPECT_DOUBLE_EQ(inv(0.975), 100.0);
}

TEST(Holm, Examples) {
  const auto one = holm({{"x", 0.03}});
  EXPECT_DOUBLE_EQ(one[0].p_adjusted, 0.03);
  EXPECT_TRUE(one[0].reject);
  const auto three = holm({{"a", 0.01}, {"b", 0.04}, {"c", 0.03}});
  EXPECT_NEAR(three[0].p_adjusted, 0.03, 1e-15);
  EXPECT_NEAR(three[1].p_adjusted, 0.06, 1e-15);
  EXPECT_NEAR(three[2].p_adjusted, 0.06, 1e-15);
  EXPECT_TRUE(three[0].reject);
  EXPECT_FALSE(three[1].reject);
  EXPECT_FALSE(three[2].reject);
  EXPECT_EQ(three[1].label, "b");
  EXPECT_THROW(holm({{"bad", 1.5}}), ValidationError);
}

TEST(Holm, MatchesClassicStepDown) {
  auto rng = stream_engine(77, 0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 1 + uniform_index(rng, 32);
    std::vector<std::pair<std::string, double>> ps;
    for (std::size_t i = 0; i < m; ++i) {
      const double u = static_cast<double>(uniform_index(rng, 1000000)) / 1e6;
      ps.emplace_back(std::to_string(i), u * u * u);
    }
    const auto out = holm(ps);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return ps[x].second < ps[y].second; });
    bool stopped = false;
    for (std::size_t r = 0; r < m; ++r) {
      const auto idx = order[r];
      double adj = 0;
      for (std::size_t j = 0; j <= r; ++j) adj = std::max(adj, (m - j) * ps[order[j]].second);
      adj = std::min(adj, 1.0);
      EXPECT_NEAR(out[idx].p_adjusted, adj, 1e-12);
      EXPECT_GE(out[idx].p_adjusted, out[idx].p_raw);
      if (!stopped && ps[idx].second >= 0.05 / (m - r)) stopped = true;
      EXPECT_EQ(out[idx].reject, !stopped);
    }
  }
}

TEST(Wilson, VlmAuditInterval) {
  const auto ci = wilson_ci(519, 899);
  EXPECT_NEAR(ci.low, 0.5448, 5e-4);
  EXPECT_NEAR(ci.high, 0.6092, 5e-4);
  const double p = 519.0 / 899.0, n = 899.0, z = kZ975;
  const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  EXPECT_NEAR(ci.low, centre - half, 1e-12);
  EXPECT_NEAR(ci.high, centre + half, 1e-12);
}

TEST(Wilson, BoundariesAndContainment) {
  EXPECT_DOUBLE_EQ(wilson_ci(0, 10).low, 0.0);
  EXPECT_DOUBLE_EQ(wilson_ci(10, 10).high, 1.0);
  for (std::int64_t n = 1; n <= 60; ++n)
    for (std::int64_t s = 0; s <= n; ++s) {
      const auto ci = wilson_ci(s, n);
      const double p = static_cast<double>(s) / n;
      EXPECT_LE(ci.low, p);
      EXPECT_GE(ci.high, p);
      EXPECT_GE(ci.low, 0.0);
      EXPECT_LE(ci.high, 1.0);
    }
  EXPECT_THROW(wilson_ci(0, 0), ValidationError);
  EXPECT_THROW(wilson_ci(5, 4), ValidationError);
}

TEST(Binomial, Examples) {
  EXPECT_DOUBLE_EQ(binomial_test(5, 10), 1.0);
  EXPECT_NEAR(binomial_test(10, 10), 2.0 / 1024.0, 1e-15);
  EXPECT_NEAR(binomial_test(0, 10), 2.0 / 1024.0, 1e-15);
  EXPECT_LT(binomial_test(519, 899), 1e-5);
  // n = 20, s = 14: tails {0..6} and {14..20}.
  double tail = 0;
  for (int k = 14; k <= 20; ++k) {
    double c = 1;
    for (int j = 0; j < k; ++j) c = c * (20 - j) / (j + 1);
    tail += c;
  }
  EXPECT_NEAR(binomial_test(14, 20), 2 * tail / 1048576.0, 1e-13);
  EXPECT_THROW(binomial_test(1, 0), ValidationError);
}

TEST(SignFlip, Examples) {
  const std::vector<double> a(10, 2.0), b(10, 1.0);
  EXPECT_NEAR(sign_flip_test(a, b), 2.0 / 1024.0, 1e-15);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.4f", sign_flip_test(a, b));
  EXPECT_STREQ(buf, "0.0020");
  EXPECT_DOUBLE_EQ(sign_flip_test(a, a), 1.0);
  const std::vector<double> x = {1, 2, -0.5}, zero(3, 0.0);
  EXPECT_DOUBLE_EQ(sign_flip_test(x, zero), 0.5);
  EXPECT_THROW(sign_flip_test(std::vector<double>{}, std::vector<double>{}), ValidationError);
  EXPECT_THROW(sign_flip_test(std::vector<double>(31, 1.0), std::vector<double>(31, 0.0)), ValidationError);
}

TEST(SignFlip, MatchesEnumerationOracle) {
  auto rng = stream_engine(3, 1);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 12);
    std::vector<double> a(n), b(n, 0.0);
    for (auto& v : a) v = static_cast<double>(uniform_index(rng, 9)) - 4.0;
    EXPECT_EQ(sign_flip_test(a, b), exact_sign_p(a)) << t;
  }
}

TEST(Efficiency, RealEpochsFromHistory) {
  TrainingHistory h;
  for (int s = 1; s <= 40; ++s) h.entries.push_back({s, 1.0 / s, 0.9, 128, 128});
  h.selected_index = 30;
  EXPECT_DOUBLE_EQ(checkpoint_effort(h, EffortMode::epoch), 31.0);
  EXPECT_NEAR(checkpoint_effort(h, EffortMode::real_epoch, 3917), 31.0 * 128 / 3917, 1e-12);
  EXPECT_NEAR(31.0 * 128 / 3917, 1.013, 5e-4);
  h.selected_index = 0;
  EXPECT_NEAR(checkpoint_effort(h, EffortMode::real_epoch, 3917), 128.0 / 3917, 1e-15);
  EXPECT_THROW(checkpoint_effort(h, EffortMode::real_epoch, 0), ValidationError);

  TrainingHistory sparse;
  sparse.entries = {{10, 1.0, 0.5, 43, 128}, {25, 0.8, 0.6, 43, 128}};
  sparse.selected_index = 1;
  EXPECT_NEAR(checkpoint_effort(sparse, EffortMode::real_epoch, 1000), 25.0 * 43 / 1000, 1e-12);
  sparse.entries[1].real_in_batch = 200;
  EXPECT_THROW(checkpoint_effort(sparse, EffortMode::real_epoch, 1000), DataError);
}

TEST(Efficiency, BatchQuota) {
  const auto split = batch_quota(1, 2, 128);
  EXPECT_EQ(split.real, 43);
  EXPECT_EQ(split.synthetic, 85);
  EXPECT_EQ(batch_quota(1, 1, 128).real, 64);
  EXPECT_EQ(batch_quota(1, 0, 128).synthetic, 0);
  EXPECT_THROW(batch_quota(0, 1, 128), ValidationError);
}

TEST(Efficiency, CompareBySeed) {
  std::vector<TrainingHistory> base, cand;
  for (int s = 0; s < 10; ++s) {
    TrainingHistory b, c;
    b.seed = c.seed = s;
    for (int e = 1; e <= 30; ++e) {
      b.entries.push_back({e, std::abs(e - 20.0 - s % 3), 0.9, 128, 128});
      c.entries.push_back({e, std::abs(e - 10.0 - s % 2), 0.9, 64, 128});
    }
    b.selected_index = select_min_val_loss(b.entries);
    c.selected_index = select_min_val_loss(c.entries);
    base.push_back(b);
    cand.insert(cand.begin(), c);
  }
  const auto cmp = compare_effort(base, cand, EffortMode::epoch);
  EXPECT_EQ(cmp.candidate.seeds, cmp.baseline.seeds);
  EXPECT_NEAR(cmp.sign_flip_p, 2.0 / 1024, 1e-15);
  EXPECT_GT(cmp.reduction_pct, 0.0);
  EXPECT_NEAR(cmp.reduction_pct, 100.0 * (cmp.baseline.mean - cmp.candidate.mean) / cmp.baseline.mean, 1e-12);
  const auto table = format_effort_table({cmp}, EffortMode::epoch);
  EXPECT_EQ(table.substr(0, kEffortHeader.size()), kEffortHeader);
  EXPECT_NE(table.find(",0.0020\n"), std::string::npos) << table;
  cand.pop_back();
  EXPECT_THROW(compare_effort(base, cand, EffortMode::epoch), ValidationError);
}

TEST(SeedStability, SampleSd) {
  const auto truth = cycle_truth(10);
  std::vector<bool> nine(10, true);
  nine[3] = false;
  const auto st = seed_stability(make_cube("c", truth, {nine, std::vector<bool>(10, true)}));
  EXPECT_NEAR(st.mean, 0.95, 1e-15);
  EXPECT_NEAR(st.sd, std::sqrt(0.005), 1e-12);
  EXPECT_NEAR(st.sd, 0.0707, 1e-4);
  const auto flat = seed_stability(make_cube("c", truth, {nine, nine, nine}));
  EXPECT_DOUBLE_EQ(flat.sd, 0.0);
  EXPECT_THROW(seed_stability(make_cube("c", truth, {nine})), ValidationError);
}

TEST(Confusion, MeanAndHalfInterval) {
  std::vector<TumourClass> truth(10, TumourClass::glioma);
  truth.push_back(TumourClass::meningioma);
  std::vector<bool> s1(11, false), s2(11, false);
  for (int i = 0; i < 6; ++i) s1[i] = true;
  for (int i = 0; i < 7; ++i) s2[i] = true;
  const auto c = confusion(make_cube("c", truth, {s1, s2}));
  EXPECT_EQ(c.seeds, 2u);
  EXPECT_NEAR(c.mean[0][0], 65.0, 1e-12);
  EXPECT_NEAR(c.mean[0][1], 35.0, 1e-12);
  EXPECT_NEAR(c.half_ci[0][0], 1.96 * std::sqrt(50.0) / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(c.mean[1][2], 100.0, 1e-12);
  EXPECT_TRUE(c.empty_row[2]);
  EXPECT_TRUE(c.empty_row[3]);
  EXPECT_FALSE(c.empty_row[0]);
  for (double v : c.mean[3]) EXPECT_EQ(v, 0.0);

  const auto perfect = confusion(fx::random_cube("p", 1, 40, 1.0, 8));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_DOUBLE_EQ(perfect.mean[i][j], i == j ? 100.0 : 0.0);
      EXPECT_DOUBLE_EQ(perfect.half_ci[i][j], 0.0);
    }
}

TEST(Comparison, HolmFamilyAcrossConditionsAndMetrics) {
  const auto base = fx::random_cube("real_only", 3, 60, 0.75, 1);
  std::vector<PredictionCube> conds;
  for (int k = 0; k < 4; ++k) conds.push_back(fx::random_cube("cond" + std::to_string(k), 3, 60, 0.8, 10 + k));
  for (auto& c : conds) c.image_ids = base.image_ids, c.true_class = base.true_class, c.true_plane = base.true_plane;
  const auto rows = compare_to_baseline(base, conds, kAllMetrics, {300, 42, 0});
  ASSERT_EQ(rows.size(), 32u);
  std::vector<std::pair<std::string, double>> family;
  for (const auto& r : rows) family.emplace_back(r.condition + ":" + std::string(to_string(r.metric)), r.p_raw);
  const auto adj = holm(family);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(rows[i].p_holm, adj[i].p_adjusted);
    EXPECT_GE(rows[i].p_holm, rows[i].p_raw);
  }
  const auto primary = format_primary_table("cnn", rows);
  EXPECT_EQ(std::count(primary.begin(), primary.end(), '\n'), 5);
  EXPECT_EQ(primary.substr(0, kComparisonHeader.size()), kComparisonHeader);
  const auto full = format_full_table("cnn", rows);
  EXPECT_EQ(std::count(full.begin(), full.end(), '\n'), 33);

  auto planeless = base;
  planeless.true_plane.reset();
  planeless.pred_plane.reset();
  std::vector<PredictionCube> pc = {conds[0]};
  pc[0].true_plane.reset();
  pc[0].pred_plane.reset();
  EXPECT_EQ(compare_to_baseline(planeless, pc, kAllMetrics, {100, 42, 0}).size(), 7u);
}
