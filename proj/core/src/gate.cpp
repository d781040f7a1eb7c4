#include "synthqa/gate.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "synthqa/error.hpp"

namespace synthqa {

std::string_view to_string(GateVerdict v) {
  switch (v) {
    case GateVerdict::accept: return "accept";
    case GateVerdict::reject_blank_mean: return "reject_blank_mean";
    case GateVerdict::reject_blank_nonzero: return "reject_blank_nonzero";
    case GateVerdict::reject_phash_dup: return "reject_phash_dup";
  }
  return "?";
}

CandidateGate::CandidateGate(GateConfig config, std::vector<PHash> references)
    : config_(config), references_(std::move(references)) {}

GateDecision CandidateGate::screen(std::string candidate_id, const GrayImage& img) {
  return gate_candidate(std::move(candidate_id), img, seen_, references_, config_);
}

GateDecision gate_candidate(std::string candidate_id, const GrayImage& img, std::vector<PHash>& seen,
                            const std::vector<PHash>& references, const GateConfig& config) {
  if (img.empty()) throw ValidationError("gate_candidate: empty image");
  GateDecision d;
  d.candidate_id = std::move(candidate_id);
  std::uint64_t sum = 0, nonzero = 0;
  for (auto v : img.pixels) {
    sum += v;
    nonzero += v != 0;
  }
  const double n = static_cast<double>(img.size());
  d.mean_intensity = static_cast<double>(sum) / n;
  d.nonzero_fraction = static_cast<double>(nonzero) / n;
  if (d.mean_intensity < config.min_mean_intensity) {
    d.verdict = GateVerdict::reject_blank_mean;
    return d;
  }
  if (d.nonzero_fraction < config.min_nonzero_fraction) {
    d.verdict = GateVerdict::reject_blank_nonzero;
    return d;
  }
  d.hash = phash(img, config.phash);
  int nearest = std::numeric_limits<int>::max();
  for (const auto& h : seen) nearest = std::min(nearest, hamming(d.hash, h));
  for (const auto& h : references) nearest = std::min(nearest, hamming(d.hash, h));
  if (nearest != std::numeric_limits<int>::max()) d.nearest_hamming = nearest;
  if (d.nearest_hamming && *d.nearest_hamming <= config.max_duplicate_distance) {
    d.verdict = GateVerdict::reject_phash_dup;
    return d;
  }
  d.verdict = GateVerdict::accept;
  seen.push_back(d.hash);
  return d;
}

std::string decision_to_json(const GateDecision& d) {
  nlohmann::ordered_json j;
  j["candidate_id"] = d.candidate_id;
  j["verdict"] = to_string(d.verdict);
  j["mean_intensity"] = d.mean_intensity;
  j["nonzero_fraction"] = d.nonzero_fraction;
  j["nearest_hamming"] = d.nearest_hamming ? nlohmann::ordered_json(*d.nearest_hamming) : nullptr;
  j["phash"] = d.verdict == GateVerdict::reject_blank_mean ||
                       d.verdict == GateVerdict::reject_blank_nonzero
                   ? nlohmann::ordered_json(nullptr)
                   : nlohmann::ordered_json(to_hex(d.hash));
  return j.dump();
}

std::int64_t round_half_even(double x) {
  const double floor = std::floor(x);
  const double frac = x - floor;
  auto f = static_cast<std::int64_t>(floor);
  if (frac > 0.5) return f + 1;
  if (frac < 0.5) return f;
  return (f % 2 == 0) ? f : f + 1;
}

QuotaResult quota(const StratumCounts& real_counts, double rho) {
  if (!(rho > 0.0)) throw ValidationError("quota: rho must be positive");
  QuotaResult result;
  for (const auto& [stratum, n] : real_counts) {
    const auto q = static_cast<std::size_t>(round_half_even(rho * static_cast<double>(n)));
    result.quotas[stratum] = q;
    result.total += q;
  }
  return result;
}

}  // namespace synthqa
