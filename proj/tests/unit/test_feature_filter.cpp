#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "synthqa/error.hpp"
#include "synthqa/feature_filter.hpp"

using namespace synthqa;
using synthqa::fx::gaussian_rows;
using synthqa::fx::to_features;

namespace {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Shrinkage intensity evaluated term by term from the definition.
long double lw_shrinkage_oracle(const Eigen::MatrixXd& x) {
  const LMat X = x.cast<long double>();
  const long double n = X.rows(), p = X.cols();
  const LMat S = X.transpose() * X / n;
  const long double mu = S.trace() / p;
  const LMat target = mu * LMat::Identity(X.cols(), X.cols());
  const long double d2 = (S - target).squaredNorm() / p;
  long double b2 = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const LVec xi = X.row(i).transpose();
    b2 += (xi * xi.transpose() - S).squaredNorm() / p;
  }
  b2 /= n * n;
  return std::min(b2, d2) / d2;
}

// Gauss-Jordan inverse with partial pivoting.
LMat invert(LMat a) {
  const Eigen::Index n = a.rows();
  LMat inv = LMat::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const long double d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = a(r, c);
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

long double mahalanobis_oracle(const StratumFilterModel& m, const Eigen::VectorXd& x) {
  const LVec y = m.basis().cast<long double>().transpose() * (x - m.mean()).cast<long double>();
  return y.dot(invert(m.covariance().cast<long double>()) * y);
}

StratumFilterModel identity_model(std::size_t d) {
  StratumFilterModel m(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d),
                       Eigen::MatrixXd::Identity(d, d), 0.0);
  m.calibrate({0.0, 1.0}, 0.975);
  return m;
}

FeatureMatrix points(const std::vector<std::string>& ids, const std::vector<std::vector<float>>& rows) {
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return FeatureMatrix(ids, rows.front().size(), data);
}

// Greedy k-centre written directly from its definition.
std::vector<std::string> fps_oracle(const StratumFilterModel& m, const FeatureMatrix& f, std::size_t count) {
  std::vector<std::size_t> idx(f.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return f.ids()[a] < f.ids()[b]; });
  std::vector<LVec> y;
  for (auto i : idx) y.push_back(m.project(f.row(i)).cast<long double>());
  LVec c = LVec::Zero(y[0].size());
  for (const auto& v : y) c += v;
  c /= static_cast<long double>(y.size());
  std::vector<std::size_t> chosen;
  std::size_t best = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if ((y[i] - c).squaredNorm() < (y[best] - c).squaredNorm()) best = i;
  chosen.push_back(best);
  while (chosen.size() < count) {
    long double best_d = -1;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      long double dmin = INFINITY;
      for (auto j : chosen) dmin = std::min(dmin, (y[i] - y[j]).squaredNorm());
      if (dmin > best_d) {
        best_d = dmin;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  std::vector<std::string> out;
  for (auto i : chosen) out.push_back(f.ids()[idx[i]]);
  return out;
}

ImageRecord rec(const std::string& id, Stratum s, Source src) {
  return {id, id + ".png", Split::train, src, s.tumour_class, s.plane};
}

}  // namespace

TEST(LedoitWolf, MatchesFormulaOracle) {
  Eigen::MatrixXd x = gaussian_rows(50, 5, 11);
  x.col(1) *= 3.0;
  x.col(2) += 0.8 * x.col(0);
  x = x.rowwise() - x.colwise().mean();
  const auto lw = ledoit_wolf(x);
  EXPECT_NEAR(lw.shrinkage, static_cast<double>(lw_shrinkage_oracle(x)), 1e-10);
  const Eigen::MatrixXd S = x.transpose() * x / 50.0;
  const double mu = S.trace() / 5.0;
  const Eigen::MatrixXd expect = (1 - lw.shrinkage) * S + lw.shrinkage * mu * Eigen::MatrixXd::Identity(5, 5);
  EXPECT_LT((lw.covariance - expect).norm(), 1e-12);
}

TEST(LedoitWolf, OracleAcrossShapes) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t n = 5 + s * 7, p = 2 + s % 9;
    Eigen::MatrixXd x = gaussian_rows(n, p, 100 + s);
    x = x.rowwise() - x.colwise().mean();
    const auto lw = ledoit_wolf(x);
    EXPECT_NEAR(lw.shrinkage, static_cast<double>(lw_shrinkage_oracle(x)), 1e-10) << n << "x" << p;
    EXPECT_GE(lw.shrinkage, 0.0);
    EXPECT_LE(lw.shrinkage, 1.0);
  }
}

TEST(FitFilter, ModelInvariants) {
  const auto model = fit_filter(gaussian_rows(120, 30, 5, 1.0, 2.0));
  EXPECT_EQ(model.components(), 30u);
  const Eigen::MatrixXd gram = model.basis().transpose() * model.basis();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff(), 1e-8);
  const auto& cov = model.covariance();
  EXPECT_LT((cov - cov.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(model.threshold(), model.threshold_at(0.975));
}

TEST(FitFilter, ComponentCountFollowsSmallestStratum) {
  const auto model = fit_filter(gaussian_rows(310, 2048, 6));
  EXPECT_EQ(model.components(), 200u);
  const Eigen::MatrixXd gram = model.basis().transpose() * model.basis();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(200, 200)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FitFilter, MinimalAndDegenerateInputs) {
  Eigen::MatrixXd three(3, 2);
  three << 0, 0, 1, 0, 0, 2;
  const auto m = fit_filter(three);
  EXPECT_EQ(m.components(), 2u);
  EXPECT_TRUE(std::isfinite(m.threshold()));

  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(4, 3);
  const auto flat = fit_filter(same);
  EXPECT_DOUBLE_EQ(mahalanobis_sq(flat, Eigen::VectorXd::Ones(3)), 0.0);

  EXPECT_THROW(fit_filter(Eigen::MatrixXd::Zero(1, 3)), DataError);
}

TEST(Mahalanobis, MatchesExplicitInverseOracle) {
  Eigen::MatrixXd pts(5, 3);
  pts << 1.0, 2.0, 0.5, -1.5, 0.3, 2.2, 0.7, -2.1, 1.1, 2.4, 1.8, -0.9, -0.6, 0.4, 0.2;
  const auto model = fit_filter(pts);
  const Eigen::VectorXd queries[] = {Eigen::Vector3d(0.3, -0.2, 1.7), Eigen::Vector3d(5.0, 5.0, -5.0),
                                     Eigen::Vector3d(1.0, 2.0, 0.5)};
  for (const auto& q : queries) {
    const double got = mahalanobis_sq(model, q);
    const auto want = mahalanobis_oracle(model, q);
    EXPECT_NEAR(got, static_cast<double>(want), 1e-9 * static_cast<double>(want));
  }
  EXPECT_NEAR(mahalanobis_sq(model, model.mean()), 0.0, 1e-24);
}

TEST(Mahalanobis, IdentityCovarianceIsProjectedNorm) {
  auto model = fit_filter(gaussian_rows(40, 6, 3));
  model.set_covariance(Eigen::MatrixXd::Identity(6, 6));
  const Eigen::VectorXd x = gaussian_rows(1, 6, 4).row(0).transpose();
  EXPECT_NEAR(mahalanobis_sq(model, x), model.project(x).squaredNorm(), 1e-12);
  EXPECT_THROW(mahalanobis_sq(model, Eigen::VectorXd::Zero(5)), ValidationError);
}

TEST(Mahalanobis, RotationInvariant) {
  const Eigen::MatrixXd x = gaussian_rows(60, 8, 21, 0.5, 1.5);
  const Eigen::MatrixXd r = gaussian_rows(8, 8, 22);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(r).householderQ();
  const auto a = fit_filter(x);
  const auto b = fit_filter(Eigen::MatrixXd(x * q));
  const Eigen::MatrixXd probes = gaussian_rows(10, 8, 23, 0.0, 2.0);
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    const Eigen::VectorXd p = probes.row(i).transpose();
    const double da = mahalanobis_sq(a, p);
    const double db = mahalanobis_sq(b, Eigen::VectorXd(q.transpose() * p));
    EXPECT_NEAR(da, db, 1e-8 * std::max(1.0, da));
  }
}

TEST(FilterCandidates, CalibrationOnRealSet) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const std::size_t n = 50 + 31 * s, d = 8 + 17 * s;
    const auto feats = to_features(gaussian_rows(n, d, 300 + s), "r");
    const auto model = fit_filter(feats);
    const auto report = filter_candidates(model, feats);
    EXPECT_LE(static_cast<double>(report.rejected_count) / n, 0.025 + 1.0 / n) << n << "x" << d;
    for (const auto& c : report.candidates) EXPECT_EQ(c.pass, c.d2 <= model.threshold());
  }
}

TEST(FilterCandidates, MeanPassesAndFarPointFails) {
  const auto model = fit_filter(gaussian_rows(80, 4, 9));
  std::vector<float> centre(model.mean().data(), model.mean().data() + 4);
  std::vector<float> far = {50.f, -50.f, 50.f, -50.f};
  const auto report = filter_candidates(model, points({"far", "mid"}, {far, centre}));
  EXPECT_FALSE(report.candidates[0].pass);
  EXPECT_TRUE(report.candidates[1].pass);
  EXPECT_EQ(report.rejected_count, 1u);
  EXPECT_EQ(report.passing_ids(), std::vector<std::string>{"mid"});
}

TEST(FilterReport, CsvLayout) {
  FilterReport r;
  r.candidates = {{"a", 1.5, true, {}}, {"b", 9.0, false, {}}};
  r.set_selection({"a"});
  EXPECT_EQ(r.to_csv(), "id,d2,pass,selection_rank\na,1.5,1,1\nb,9,0,\n");
  EXPECT_EQ(r.to_csv(false), "a,1.5,1,1\nb,9,0,\n");
}

TEST(ThresholdAudit, CountsAgainstEachQuantile) {
  const auto model = fit_filter(gaussian_rows(200, 10, 41));
  const auto cands = to_features(gaussian_rows(300, 10, 42, 0.0, 1.3), "c");
  const auto report = filter_candidates(model, cands);
  const auto rows = threshold_audit(model, report, kAuditQuantiles);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    std::size_t n = 0;
    for (const auto& c : report.candidates) n += c.d2 > model.threshold_at(row.quantile);
    EXPECT_EQ(row.rejected, n);
  }
  EXPECT_GE(rows[0].rejected, rows[1].rejected);
  EXPECT_GE(rows[1].rejected, rows[2].rejected);
  EXPECT_EQ(rows[1].rejected, report.rejected_count);
}

TEST(FarthestPoint, UnitSquare) {
  const auto model = identity_model(2);
  const auto f = points({"d", "b", "a", "c"}, {{1, 1}, {1, 0}, {0, 0}, {0, 1}});
  EXPECT_EQ(farthest_point_select(model, f, 4), (std::vector<std::string>{"a", "d", "b", "c"}));
  EXPECT_EQ(farthest_point_select(model, f, 2), (std::vector<std::string>{"a", "d"}));
  EXPECT_TRUE(farthest_point_select(model, f, 0).empty());
  EXPECT_THROW(farthest_point_select(model, f, 5), DataError);
}

TEST(FarthestPoint, MatchesOracleAndIsPrefixClosed) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto model = fit_filter(gaussian_rows(60, 12, 500 + s));
    const auto cand = to_features(gaussian_rows(40, 12, 600 + s), "c");
    const auto full = farthest_point_select(model, cand, 40);
    EXPECT_EQ(full, fps_oracle(model, cand, 40));
    EXPECT_EQ(std::set<std::string>(full.begin(), full.end()).size(), 40u);
    for (std::size_t m : {1u, 7u, 20u}) {
      const auto part = farthest_point_select(model, cand, m);
      EXPECT_TRUE(std::equal(part.begin(), part.end(), full.begin()));
    }
  }
}

TEST(FarthestPoint, MahalanobisMetricDiffersFromEuclidean) {
  Eigen::MatrixXd real = gaussian_rows(100, 2, 77);
  real.col(0) *= 10.0;
  const auto model = fit_filter(real);
  const auto cand = to_features(gaussian_rows(30, 2, 78, 0.0, 3.0), "c");
  const auto e = farthest_point_select(model, cand, 30, FpsMetric::euclidean);
  const auto m = farthest_point_select(model, cand, 30, FpsMetric::mahalanobis);
  EXPECT_EQ(std::set<std::string>(e.begin(), e.end()), std::set<std::string>(m.begin(), m.end()));
  EXPECT_NE(e, m);
}

namespace {

struct SetsFixture {
  Manifest real, pool;
  FeatureMatrix real_f, pool_f;
  Stratum s1{TumourClass::glioma, Plane::axial};
  Stratum s2{TumourClass::pituitary, Plane::sagittal};

  SetsFixture(std::size_t n1, std::size_t n2, std::size_t p1, std::size_t p2) {
    std::vector<ImageRecord> rr, pr;
    Eigen::MatrixXd rf(n1 + n2, 6), pf(p1 + p2, 6);
    rf << gaussian_rows(n1, 6, 1), gaussian_rows(n2, 6, 2, 5.0);
    pf << gaussian_rows(p1, 6, 3, 0.0, 0.7), gaussian_rows(p2, 6, 4, 5.0, 0.7);
    std::vector<std::string> rid, pid;
    for (std::size_t i = 0; i < n1 + n2; ++i) {
      rid.push_back(fx::id_for("r", i));
      rr.push_back(rec(rid.back(), i < n1 ? s1 : s2, Source::real));
    }
    for (std::size_t i = 0; i < p1 + p2; ++i) {
      pid.push_back(fx::id_for("p", i));
      pr.push_back(rec(pid.back(), i < p1 ? s1 : s2, Source::synthetic));
    }
    real = Manifest(rr);
    pool = Manifest(pr);
    real_f = to_features(rf, "r");
    pool_f = to_features(pf, "p");
  }
};

}  // namespace

TEST(FilteredSets, NestedAcrossRatios) {
  SetsFixture fx(20, 30, 200, 200);
  const auto sets = build_filtered_sets(fx.real, fx.real_f, fx.pool, fx.pool_f, {1.0, 2.0});
  ASSERT_EQ(sets.sets.size(), 2u);
  EXPECT_EQ(sets.sets[0].manifest.size(), 50u);
  EXPECT_EQ(sets.sets[1].manifest.size(), 100u);
  for (const auto& r : sets.sets[0].manifest.records()) {
    EXPECT_TRUE(sets.sets[1].manifest.contains(r.id));
    EXPECT_EQ(r.source, Source::synthetic);
  }
  const auto counts = stratum_counts(sets.sets[1].manifest);
  EXPECT_EQ(counts.at(fx.s1), 40u);
  EXPECT_EQ(counts.at(fx.s2), 60u);
  ASSERT_EQ(sets.strata.size(), 2u);
  for (const auto& s : sets.strata) {
    for (const auto& id : s.report.selection_order) {
      const auto it = std::find_if(s.report.candidates.begin(), s.report.candidates.end(),
                                   [&](const auto& c) { return c.id == id; });
      ASSERT_NE(it, s.report.candidates.end());
      EXPECT_TRUE(it->pass);
    }
  }
  const auto again = build_filtered_sets(fx.real, fx.real_f, fx.pool, fx.pool_f, {1.0, 2.0}, {}, 4);
  EXPECT_EQ(again.sets[1].manifest, sets.sets[1].manifest);
  EXPECT_EQ(again.threshold_audit_json(), sets.threshold_audit_json());
}

TEST(FilteredSets, ShortfallNamesStratum) {
  SetsFixture fx(20, 30, 200, 25);
  try {
    build_filtered_sets(fx.real, fx.real_f, fx.pool, fx.pool_f, {1.0});
    FAIL() << "expected shortfall";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("pituitary_sagittal"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("glioma_axial"), std::string::npos) << msg;
  }
  EXPECT_THROW(build_filtered_sets(fx.real, fx.real_f, fx.pool, fx.pool_f, {}), ValidationError);
}
