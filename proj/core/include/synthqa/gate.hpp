#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthqa/image.hpp"
#include "synthqa/manifest.hpp"
#include "synthqa/phash.hpp"

namespace synthqa {

enum class GateVerdict { accept, reject_blank_mean, reject_blank_nonzero, reject_phash_dup };

std::string_view to_string(GateVerdict v);

struct GateDecision {
  std::string candidate_id;
  GateVerdict verdict = GateVerdict::accept;
  double mean_intensity = 0.0;
  double nonzero_fraction = 0.0;
  std::optional<int> nearest_hamming;  // set once the hash stage runs
  PHash hash;
};

struct GateConfig {
  double min_mean_intensity = 30.0;     // reject when mean < this
  double min_nonzero_fraction = 0.08;   // reject when nonzero fraction < this
  int max_duplicate_distance = 6;       // reject when Hamming <= this
  PHashOptions phash;
};

// Per-stratum screening state: hashes of accepted candidates plus the real
// reference hashes they must stay away from.
class CandidateGate {
 public:
  explicit CandidateGate(GateConfig config = {}, std::vector<PHash> references = {});

  // Checks mean intensity, then nonzero fraction, then pHash distance to
  // accepted candidates and references. Accepted hashes join the seen set.
  GateDecision screen(std::string candidate_id, const GrayImage& img);

  const std::vector<PHash>& seen() const noexcept { return seen_; }
  const std::vector<PHash>& references() const noexcept { return references_; }

 private:
  GateConfig config_;
  std::vector<PHash> references_;
  std::vector<PHash> seen_;
};

// Stateless form: `seen` is extended on acceptance.
GateDecision gate_candidate(std::string candidate_id, const GrayImage& img, std::vector<PHash>& seen,
                            const std::vector<PHash>& references, const GateConfig& config = {});

std::string decision_to_json(const GateDecision& d);

// Round half to even.
std::int64_t round_half_even(double x);

struct QuotaResult {
  StratumCounts quotas;
  std::size_t total = 0;
};

// quota_s = round_half_even(rho * n_s). Throws ValidationError if rho <= 0.
QuotaResult quota(const StratumCounts& real_counts, double rho);

}  // namespace synthqa
