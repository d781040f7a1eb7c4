#include "synthqa/gen_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "synthqa/error.hpp"
#include "synthqa/parallel.hpp"
#include "synthqa/random.hpp"
#include "text_util.hpp"

namespace synthqa {

Eigen::MatrixXd to_matrix(const FeatureMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.dim(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
  }
  return out;
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw ValidationError("fit_gaussian: need at least 2 rows");
  GaussianFit g;
  g.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - g.mean.transpose();
  g.covariance = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  return g;
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw DataError(std::string(what) + " contains non-finite values");
}

}  // namespace

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  if (a.mean.size() != b.mean.size()) throw ValidationError("frechet_distance: dim mismatch");
  const Eigen::MatrixXd root_a = psd_sqrt(a.covariance);
  const Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const double trace_root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double mean_term = (a.mean - b.mean).squaredNorm();
  return mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_root;
}

double fid(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen) {
  if (real.rows() < 2 || gen.rows() < 2) throw ValidationError("fid: need at least 2 rows per set");
  if (real.cols() != gen.cols()) throw ValidationError("fid: feature dims differ");
  require_finite(real, "fid real features");
  require_finite(gen, "fid generated features");
  return frechet_distance(fit_gaussian(real), fit_gaussian(gen));
}

double fid(const FeatureMatrix& real, const FeatureMatrix& gen) {
  return fid(to_matrix(real), to_matrix(gen));
}

double mmd2_cubic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const auto m = static_cast<double>(x.rows());
  const auto n = static_cast<double>(y.rows());
  if (x.rows() < 2 || y.rows() < 2) throw ValidationError("mmd2_cubic: need at least 2 rows per set");
  if (x.cols() != y.cols()) throw ValidationError("mmd2_cubic: feature dims differ");
  const double d = static_cast<double>(x.cols());
  auto kernel = [d](const Eigen::MatrixXd& gram) {
    return ((gram.array() / d) + 1.0).cube().matrix();
  };
  const Eigen::MatrixXd kxx = kernel(x * x.transpose());
  const Eigen::MatrixXd kyy = kernel(y * y.transpose());
  const Eigen::MatrixXd kxy = kernel(x * y.transpose());
  const double sxx = kxx.sum() - kxx.trace();
  const double syy = kyy.sum() - kyy.trace();
  return sxx / (m * (m - 1.0)) + syy / (n * (n - 1.0)) - 2.0 * kxy.sum() / (m * n);
}

namespace {

std::vector<Eigen::Index> sample_without_replacement(std::mt19937_64& engine, std::size_t population,
                                                     std::size_t count) {
  std::vector<Eigen::Index> idx(population);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(engine, population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

KidResult kid(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, const KidConfig& config) {
  if (real.rows() < 2 || gen.rows() < 2) throw ValidationError("kid: need at least 2 rows per set");
  if (real.cols() != gen.cols()) throw ValidationError("kid: feature dims differ");
  if (config.subsets == 0) throw ValidationError("kid: subsets must be positive");
  if (config.subset_max < 2) throw ValidationError("kid: subset_max must be at least 2");

  KidResult result;
  result.real_subset = std::min<std::size_t>(config.subset_max, static_cast<std::size_t>(real.rows()));
  result.gen_subset = std::min<std::size_t>(config.subset_max, static_cast<std::size_t>(gen.rows()));
  result.subset_values.resize(config.subsets);
  parallel_for(config.subsets, config.threads, [&](std::size_t s) {
    auto engine = stream_engine(config.seed, s);
    const auto gi = sample_without_replacement(engine, static_cast<std::size_t>(gen.rows()), result.gen_subset);
    const auto ri = sample_without_replacement(engine, static_cast<std::size_t>(real.rows()), result.real_subset);
    result.subset_values[s] = mmd2_cubic(gen(gi, Eigen::all), real(ri, Eigen::all));
  });
  const double n = static_cast<double>(config.subsets);
  const double mean = std::accumulate(result.subset_values.begin(), result.subset_values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : result.subset_values) ss += (v - mean) * (v - mean);
  result.kid = mean;
  result.std_error = config.subsets > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return result;
}

KidResult kid(const FeatureMatrix& real, const FeatureMatrix& gen, const KidConfig& config) {
  return kid(to_matrix(real), to_matrix(gen), config);
}

namespace {

// Squared distance from each row of `set` to its k-th nearest other row.
std::vector<double> kth_radius_sq(const Eigen::MatrixXd& set, std::size_t k, unsigned threads) {
  const auto n = static_cast<std::size_t>(set.rows());
  std::vector<double> radii(n);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        d.push_back((set.row(static_cast<Eigen::Index>(i)) - set.row(static_cast<Eigen::Index>(j))).squaredNorm());
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    radii[i] = d[k - 1];
  });
  return radii;
}

double coverage(const Eigen::MatrixXd& manifold, const std::vector<double>& radii,
                const Eigen::MatrixXd& probes, unsigned threads) {
  const auto n = static_cast<std::size_t>(probes.rows());
  std::vector<char> inside(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto p = probes.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < manifold.rows(); ++j) {
      if ((p - manifold.row(j)).squaredNorm() <= radii[static_cast<std::size_t>(j)]) {
        inside[i] = 1;
        return;
      }
    }
  });
  return static_cast<double>(std::count(inside.begin(), inside.end(), 1)) / static_cast<double>(n);
}

}  // namespace

PrecisionRecall precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen,
                                 std::size_t k, unsigned threads) {
  if (k == 0) throw ValidationError("precision_recall: k must be positive");
  if (static_cast<std::size_t>(real.rows()) < k + 1 || static_cast<std::size_t>(gen.rows()) < k + 1)
    throw ValidationError("precision_recall: each set needs at least k + 1 rows");
  if (real.cols() != gen.cols()) throw ValidationError("precision_recall: feature dims differ");
  const auto real_radii = kth_radius_sq(real, k, threads);
  const auto gen_radii = kth_radius_sq(gen, k, threads);
  return {coverage(real, real_radii, gen, threads), coverage(gen, gen_radii, real, threads)};
}

PrecisionRecall precision_recall(const FeatureMatrix& real, const FeatureMatrix& gen, std::size_t k,
                                 unsigned threads) {
  return precision_recall(to_matrix(real), to_matrix(gen), k, threads);
}

std::string_view to_string(FidTier t) {
  switch (t) {
    case FidTier::extraordinary: return "extraordinary";
    case FidTier::excellent: return "excellent";
    case FidTier::good: return "good";
    case FidTier::fair: return "fair";
  }
  return "?";
}

FidTier fid_tier(double fid) {
  if (fid < 30.0) return FidTier::extraordinary;
  if (fid < 50.0) return FidTier::excellent;
  if (fid < 75.0) return FidTier::good;
  return FidTier::fair;
}

CheckpointSelection select_checkpoint(std::span<const SnapshotMetrics> snapshots, double tie_margin) {
  if (snapshots.empty()) throw ValidationError("select_checkpoint: no snapshots");
  CheckpointSelection sel;
  sel.tier = FidTier::fair;
  for (const auto& s : snapshots) sel.tier = std::min(sel.tier, s.tier());
  for (std::size_t i = 0; i < snapshots.size(); ++i)
    if (snapshots[i].tier() == sel.tier) sel.eligible.push_back(i);

  std::sort(sel.eligible.begin(), sel.eligible.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = snapshots[a];
    const auto& y = snapshots[b];
    if (x.composite() != y.composite()) return x.composite() > y.composite();
    if (x.kimg != y.kimg) return x.kimg < y.kimg;
    if (x.recall != y.recall) return x.recall > y.recall;
    return x.fid < y.fid;
  });

  sel.index = sel.eligible.front();
  if (sel.eligible.size() >= 2) {
    const auto& first = snapshots[sel.eligible[0]];
    const auto& second = snapshots[sel.eligible[1]];
    // Absorb representation error so a gap of exactly the margin counts.
    if (first.composite() - second.composite() <= tie_margin + 1e-12) {
      sel.recall_tiebreak = true;
      if (second.recall > first.recall ||
          (second.recall == first.recall && second.kimg < first.kimg)) {
        sel.index = sel.eligible[1];
        std::swap(sel.eligible[0], sel.eligible[1]);
      }
    }
  }
  return sel;
}

namespace {

double parse_double(std::string_view s, const std::string& source, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(source, line, "bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<SnapshotMetrics> parse_snapshot_table(std::string_view text, const std::string& source) {
  auto lines = detail::split_lines(text, source);
  if (lines.empty() || lines.front().substr(0, kSnapshotHeader.size()) != kSnapshotHeader)
    throw ParseError(source, 1, "expected header starting '" + std::string(kSnapshotHeader) + "'");
  std::vector<SnapshotMetrics> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = detail::split_fields(lines[i]);
    if (f.size() < 6) throw ParseError(source, i + 1, "expected at least 6 fields");
    SnapshotMetrics s;
    s.generator = std::string(f[0]);
    s.kimg = static_cast<std::int64_t>(parse_double(f[1], source, i + 1));
    s.fid = parse_double(f[2], source, i + 1);
    s.kid = parse_double(f[3], source, i + 1);
    s.precision = parse_double(f[4], source, i + 1);
    s.recall = parse_double(f[5], source, i + 1);
    if (!(s.fid >= 0.0) || s.precision < 0.0 || s.precision > 1.0 || s.recall < 0.0 || s.recall > 1.0)
      throw ParseError(source, i + 1, "metric out of range");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SnapshotMetrics> load_snapshot_table(const std::filesystem::path& path) {
  return parse_snapshot_table(detail::read_text_file(path), path.string());
}

std::string format_snapshot_report(const std::vector<SnapshotMetrics>& snapshots, double tie_margin) {
  std::map<std::string, std::vector<SnapshotMetrics>> groups;
  for (const auto& s : snapshots) groups[s.generator].push_back(s);
  std::string out(kSnapshotReportHeader);
  out += '\n';
  char buf[256];
  for (auto& [name, group] : groups) {
    std::stable_sort(group.begin(), group.end(),
                     [](const auto& a, const auto& b) { return a.kimg < b.kimg; });
    const auto sel = select_checkpoint(group, tie_margin);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto& s = group[i];
      std::snprintf(buf, sizeof buf, ",%lld,%.6g,%.6g,%.6g,%.6g,%s,%.6g,%d\n",
                    static_cast<long long>(s.kimg), s.fid, s.kid, s.precision, s.recall,
                    std::string(to_string(s.tier())).c_str(), s.composite(), i == sel.index ? 1 : 0);
      out += name;
      out += buf;
    }
  }
  return out;
}

}  // namespace synthqa
