#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "synthqa/training_history.hpp"

namespace synthqa {

enum class EffortMode { epoch, real_epoch };

std::string_view to_string(EffortMode m);

// Effort spent up to the selected checkpoint. In epoch mode this is the
// selected entry's step. In real_epoch mode it is the real rows consumed
// (real_in_batch times the steps since the previous entry, summed) divided
// by n_real_rows.
double checkpoint_effort(const TrainingHistory& history, EffortMode mode, std::int64_t n_real_rows = 0);

struct EffortSummary {
  std::vector<std::int64_t> seeds;
  std::vector<double> effort;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator; 0 for a single seed
};

EffortSummary summarize_effort(const std::vector<TrainingHistory>& histories, EffortMode mode,
                               std::int64_t n_real_rows = 0);

struct EffortComparison {
  std::string condition;
  EffortSummary baseline;
  EffortSummary candidate;
  double reduction_pct = 0.0;  // 100 (baseline - candidate) / baseline
  double sign_flip_p = 1.0;    // paired by seed
};

// Histories are paired by seed; throws ValidationError on unmatched seeds.
EffortComparison compare_effort(const std::vector<TrainingHistory>& baseline,
                                const std::vector<TrainingHistory>& candidate, EffortMode mode,
                                std::int64_t n_real_rows = 0);

inline constexpr std::string_view kEffortHeader =
    "condition,mode,seeds,baseline_mean,baseline_sd,mean,sd,reduction_pct,p_sign_flip";

std::string format_effort_table(const std::vector<EffortComparison>& rows, EffortMode mode);

struct BatchSplit {
  std::int64_t real = 0;
  std::int64_t synthetic = 0;
};

// Real rows per batch for a real:synthetic ratio, rounded up.
BatchSplit batch_quota(std::int64_t real_parts, std::int64_t synthetic_parts, std::int64_t batch_size);

}  // namespace synthqa
