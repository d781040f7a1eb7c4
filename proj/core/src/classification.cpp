#include "synthqa/classification.hpp"

#include <cmath>
#include <string>

#include "synthqa/error.hpp"

namespace synthqa {

namespace {

constexpr std::array<std::string_view, 8> kMetricNames = {
    "tumour_accuracy", "macro_f1",      "weighted_f1",  "f1_glioma",
    "f1_meningioma",   "f1_no_tumour",  "f1_pituitary", "plane_accuracy"};

std::size_t idx(TumourClass c) { return static_cast<std::size_t>(c); }

}  // namespace

std::string_view to_string(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> parse_metric(std::string_view s) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i)
    if (kMetricNames[i] == s) return kAllMetrics[i];
  return std::nullopt;
}

double MetricVector::get(Metric m) const {
  switch (m) {
    case Metric::tumour_accuracy: return tumour_accuracy;
    case Metric::macro_f1: return macro_f1;
    case Metric::weighted_f1: return weighted_f1;
    case Metric::f1_glioma: return per_class_f1[0];
    case Metric::f1_meningioma: return per_class_f1[1];
    case Metric::f1_no_tumour: return per_class_f1[2];
    case Metric::f1_pituitary: return per_class_f1[3];
    case Metric::plane_accuracy:
      if (!plane_accuracy) throw ValidationError("plane_accuracy requested but cube has no planes");
      return *plane_accuracy;
  }
  throw ValidationError("unknown metric");
}

void ConfusionCounts::add(TumourClass truth, TumourClass pred, double weight) {
  cells[idx(truth)][idx(pred)] += weight;
  total += weight;
}

MetricVector metrics_from_counts(const ConfusionCounts& counts) {
  if (!(counts.total > 0.0)) throw ValidationError("metrics over an empty sample");
  MetricVector out;
  double correct = 0.0;
  double macro = 0.0;
  double weighted = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double support = 0.0;
    double predicted = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      support += counts.cells[c][k];
      predicted += counts.cells[k][c];
    }
    const double tp = counts.cells[c][c];
    correct += tp;
    const double denom = support + predicted;
    const double f1 = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    out.per_class_f1[c] = f1;
    if (denom > 0.0) {
      macro += f1;
      ++present;
    }
    weighted += support * f1;
  }
  out.tumour_accuracy = correct / counts.total;
  out.macro_f1 = present > 0 ? macro / static_cast<double>(present) : 0.0;
  out.weighted_f1 = weighted / counts.total;
  if (counts.has_planes) out.plane_accuracy = counts.plane_correct / counts.total;
  return out;
}

ConfusionCounts tally(const PredictionCube& cube, std::size_t seed_index, std::span<const double> weights) {
  const std::size_t n = cube.num_images();
  if (seed_index >= cube.num_seeds()) throw ValidationError("seed index out of range");
  if (!weights.empty() && weights.size() != n) throw ValidationError("weight vector length mismatch");
  ConfusionCounts counts;
  counts.has_planes = cube.has_planes();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    counts.add(cube.true_class[i], cube.predicted_class(seed_index, i), w);
    if (counts.has_planes && cube.predicted_plane(seed_index, i) == (*cube.true_plane)[i])
      counts.plane_correct += w;
  }
  return counts;
}

MetricVector metrics(const PredictionCube& cube, std::int64_t seed) {
  return metrics_from_counts(tally(cube, cube.seed_index(seed)));
}

double seed_mean(const PredictionCube& cube, Metric metric, std::span<const double> weights) {
  if (cube.num_seeds() == 0) throw ValidationError("cube '" + cube.condition + "' has no seeds");
  double sum = 0.0;
  for (std::size_t s = 0; s < cube.num_seeds(); ++s)
    sum += metrics_from_counts(tally(cube, s, weights)).get(metric);
  return sum / static_cast<double>(cube.num_seeds());
}

SeedStability seed_stability(const PredictionCube& cube, Metric metric) {
  if (cube.num_seeds() < 2) throw ValidationError("seed_stability needs at least two seeds");
  SeedStability out;
  for (std::size_t s = 0; s < cube.num_seeds(); ++s)
    out.per_seed.push_back(metrics_from_counts(tally(cube, s)).get(metric));
  const double n = static_cast<double>(out.per_seed.size());
  for (double v : out.per_seed) out.mean += v;
  out.mean /= n;
  double ss = 0.0;
  for (double v : out.per_seed) ss += (v - out.mean) * (v - out.mean);
  out.sd = std::sqrt(ss / (n - 1.0));
  return out;
}

ConfusionSummary confusion(const PredictionCube& cube) {
  if (cube.num_seeds() == 0) throw ValidationError("confusion needs at least one seed");
  ConfusionSummary out;
  out.seeds = cube.num_seeds();
  using Grid = std::array<std::array<double, kNumClasses>, kNumClasses>;
  std::vector<Grid> per_seed(out.seeds);
  for (std::size_t s = 0; s < out.seeds; ++s) {
    const auto counts = tally(cube, s);
    for (std::size_t t = 0; t < kNumClasses; ++t) {
      double row = 0.0;
      for (double v : counts.cells[t]) row += v;
      out.empty_row[t] = row == 0.0;
      for (std::size_t p = 0; p < kNumClasses; ++p)
        per_seed[s][t][p] = row > 0.0 ? 100.0 * counts.cells[t][p] / row : 0.0;
    }
  }
  const double n = static_cast<double>(out.seeds);
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      double mean = 0.0;
      for (const auto& g : per_seed) mean += g[t][p];
      mean /= n;
      out.mean[t][p] = mean;
      if (out.seeds > 1) {
        double ss = 0.0;
        for (const auto& g : per_seed) ss += (g[t][p] - mean) * (g[t][p] - mean);
        out.half_ci[t][p] = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
    }
  }
  return out;
}

}  // namespace synthqa
