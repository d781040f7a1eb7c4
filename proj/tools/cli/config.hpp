#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace synthqa::cli {

// Every tunable of the pipeline. Defaults follow the published protocol.
struct RunConfig {
  std::int64_t seed = 42;
  std::int64_t threads = 0;  // 0 = hardware concurrency

  std::int64_t preprocess_closing_iterations = 6;
  std::int64_t preprocess_final_closing = 3;
  std::int64_t preprocess_output_size = 128;
  std::int64_t preprocess_png_compression = 6;

  std::int64_t audit_phash_max_distance = 6;
  double audit_cosine_threshold = 0.01;
  bool phash_include_dc = true;

  double gate_min_mean = 30.0;
  double gate_min_nonzero = 0.08;
  std::int64_t gate_max_hamming = 6;
  double gate_rho = 2.5;

  double filter_quantile = 0.975;
  std::int64_t filter_max_components = 200;
  std::string filter_fps_metric = "euclidean";

  std::int64_t kid_subsets = 100;
  std::int64_t kid_subset_max = 1000;
  std::int64_t pr_k = 3;
  double select_tie_margin = 0.005;

  std::int64_t eval_resamples = 5000;
  double eval_alpha = 0.05;
  double eval_ci_level = 0.95;

  std::string efficiency_mode = "real_epoch";
  std::int64_t efficiency_n_real = 0;

  // Dotted key, e.g. "audit.phash_max_distance". Throws ValidationError on
  // unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  static const std::vector<std::string>& keys();

  // Canonical "key = value" lines in key order; the digest is its SHA-256.
  std::string serialize() const;
  std::string digest() const;
};

// key = value lines; '#' comments; [section] headers prefix later keys with
// "section.". String values may be double-quoted.
void apply_config_text(RunConfig& config, std::string_view text, const std::string& source);

// SYNTHQA_<KEY> with dots replaced by underscores, upper-cased.
std::string env_name(std::string_view key);
void apply_env(RunConfig& config);

}  // namespace synthqa::cli
