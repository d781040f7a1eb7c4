#include "config.hpp"

#include <charconv>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <variant>

#include "synthqa/digest.hpp"
#include "synthqa/error.hpp"

namespace synthqa::cli {

namespace {

using Member = std::variant<std::int64_t RunConfig::*, double RunConfig::*, bool RunConfig::*,
                            std::string RunConfig::*>;

const std::map<std::string, Member>& fields() {
  static const std::map<std::string, Member> table = {
      {"seed", &RunConfig::seed},
      {"threads", &RunConfig::threads},
      {"preprocess.closing_iterations", &RunConfig::preprocess_closing_iterations},
      {"preprocess.final_closing", &RunConfig::preprocess_final_closing},
      {"preprocess.output_size", &RunConfig::preprocess_output_size},
      {"preprocess.png_compression", &RunConfig::preprocess_png_compression},
      {"audit.phash_max_distance", &RunConfig::audit_phash_max_distance},
      {"audit.cosine_threshold", &RunConfig::audit_cosine_threshold},
      {"phash.include_dc", &RunConfig::phash_include_dc},
      {"gate.min_mean", &RunConfig::gate_min_mean},
      {"gate.min_nonzero", &RunConfig::gate_min_nonzero},
      {"gate.max_hamming", &RunConfig::gate_max_hamming},
      {"gate.rho", &RunConfig::gate_rho},
      {"filter.quantile", &RunConfig::filter_quantile},
      {"filter.max_components", &RunConfig::filter_max_components},
      {"filter.fps_metric", &RunConfig::filter_fps_metric},
      {"genmetrics.kid_subsets", &RunConfig::kid_subsets},
      {"genmetrics.kid_subset_max", &RunConfig::kid_subset_max},
      {"genmetrics.pr_k", &RunConfig::pr_k},
      {"select.tie_margin", &RunConfig::select_tie_margin},
      {"eval.resamples", &RunConfig::eval_resamples},
      {"eval.alpha", &RunConfig::eval_alpha},
      {"eval.ci_level", &RunConfig::eval_ci_level},
      {"efficiency.mode", &RunConfig::efficiency_mode},
      {"efficiency.n_real", &RunConfig::efficiency_n_real},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ValidationError("config key '" + std::string(key) + "': bad value '" + std::string(value) + "'");
}

// Config problems are caller errors, not data errors.
[[noreturn]] void config_error(const std::string& source, std::size_t line, const std::string& what) {
  throw ValidationError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const auto it = fields().find(std::string(key));
  if (it == fields().end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  const std::string_view value = unquote(trim(raw));
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(this->*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          this->*member = std::string(value);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") this->*member = true;
          else if (value == "false" || value == "0") this->*member = false;
          else bad_value(key, value);
        } else {
          T parsed{};
          auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
          if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value);
          this->*member = parsed;
        }
      },
      it->second);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) out.push_back(k);
    return out;
  }();
  return names;
}

std::string RunConfig::serialize() const {
  std::string out;
  char buf[64];
  for (const auto& [key, member] : fields()) {
    out += key;
    out += " = ";
    std::visit(
        [&](auto m) {
          using T = std::remove_cv_t<std::remove_reference_t<decltype(this->*m)>>;
          if constexpr (std::is_same_v<T, std::string>) {
            out += '"' + this->*m + '"';
          } else if constexpr (std::is_same_v<T, bool>) {
            out += (this->*m) ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            std::snprintf(buf, sizeof buf, "%.17g", this->*m);
            out += buf;
          } else {
            out += std::to_string(this->*m);
          }
        },
        member);
    out += '\n';
  }
  return out;
}

std::string RunConfig::digest() const { return to_hex(sha256(serialize())); }

void apply_config_text(RunConfig& config, std::string_view text, const std::string& source) {
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(source, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(source, line_no, "expected key = value");
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    try {
      config.set(key, line.substr(eq + 1));
    } catch (const ValidationError& e) {
      config_error(source, line_no, e.what());
    }
  }
}

std::string env_name(std::string_view key) {
  std::string out = "SYNTHQA_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void apply_env(RunConfig& config) {
  for (const auto& key : RunConfig::keys())
    if (const char* v = std::getenv(env_name(key).c_str())) config.set(key, v);
}

}  // namespace synthqa::cli
