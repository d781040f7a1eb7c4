#include "synthqa/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "synthqa/error.hpp"
#include "synthqa/paired_tests.hpp"

namespace synthqa {

std::string_view to_string(EffortMode m) {
  return m == EffortMode::epoch ? "epoch" : "real_epoch";
}

double checkpoint_effort(const TrainingHistory& history, EffortMode mode, std::int64_t n_real_rows) {
  if (history.entries.empty()) throw DataError("training history has no entries");
  if (history.selected_index >= history.entries.size())
    throw ValidationError("selected checkpoint index out of range");
  if (mode == EffortMode::epoch) return static_cast<double>(history.entries[history.selected_index].step);
  if (n_real_rows <= 0) throw ValidationError("real_epoch mode needs a positive real row count");
  double rows = 0.0;
  std::int64_t previous = 0;
  for (std::size_t i = 0; i <= history.selected_index; ++i) {
    const auto& e = history.entries[i];
    if (e.step < previous) throw DataError("training history steps must be nondecreasing");
    if (e.real_in_batch < 0 || (e.batch_size > 0 && e.real_in_batch > e.batch_size))
      throw DataError("real_in_batch outside [0, batch_size]");
    rows += static_cast<double>(e.real_in_batch) * static_cast<double>(e.step - previous);
    previous = e.step;
  }
  return rows / static_cast<double>(n_real_rows);
}

EffortSummary summarize_effort(const std::vector<TrainingHistory>& histories, EffortMode mode,
                               std::int64_t n_real_rows) {
  if (histories.empty()) throw ValidationError("no training histories");
  std::vector<const TrainingHistory*> sorted;
  for (const auto& h : histories) sorted.push_back(&h);
  std::sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->seed < y->seed; });
  EffortSummary out;
  for (const auto* h : sorted) {
    if (!out.seeds.empty() && out.seeds.back() == h->seed)
      throw ValidationError("duplicate seed " + std::to_string(h->seed));
    out.seeds.push_back(h->seed);
    out.effort.push_back(checkpoint_effort(*h, mode, n_real_rows));
  }
  const double n = static_cast<double>(out.effort.size());
  for (double v : out.effort) out.mean += v;
  out.mean /= n;
  if (out.effort.size() > 1) {
    double ss = 0.0;
    for (double v : out.effort) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

EffortComparison compare_effort(const std::vector<TrainingHistory>& baseline,
                                const std::vector<TrainingHistory>& candidate, EffortMode mode,
                                std::int64_t n_real_rows) {
  EffortComparison out;
  out.baseline = summarize_effort(baseline, mode, n_real_rows);
  out.candidate = summarize_effort(candidate, mode, n_real_rows);
  if (out.baseline.seeds != out.candidate.seeds)
    throw ValidationError("baseline and candidate histories cover different seeds");
  if (!candidate.empty()) out.condition = candidate.front().condition;
  if (out.baseline.mean != 0.0)
    out.reduction_pct = 100.0 * (out.baseline.mean - out.candidate.mean) / out.baseline.mean;
  out.sign_flip_p = sign_flip_test(out.candidate.effort, out.baseline.effort);
  return out;
}

std::string format_effort_table(const std::vector<EffortComparison>& rows, EffortMode mode) {
  std::string out(kEffortHeader);
  out += '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%s,%zu,%.4f,%.4f,%.4f,%.4f,%.2f,%.4f\n",
                  std::string(to_string(mode)).c_str(), r.candidate.seeds.size(), r.baseline.mean,
                  r.baseline.sd, r.candidate.mean, r.candidate.sd, r.reduction_pct, r.sign_flip_p);
    out += r.condition;
    out += buf;
  }
  return out;
}

BatchSplit batch_quota(std::int64_t real_parts, std::int64_t synthetic_parts, std::int64_t batch_size) {
  if (real_parts <= 0 || synthetic_parts < 0) throw ValidationError("ratio parts must be positive");
  if (batch_size <= 0) throw ValidationError("batch size must be positive");
  const std::int64_t parts = real_parts + synthetic_parts;
  const std::int64_t real = (batch_size * real_parts + parts - 1) / parts;
  return {real, batch_size - real};
}

}  // namespace synthqa
