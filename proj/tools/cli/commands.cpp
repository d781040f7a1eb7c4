#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "synthqa/audit.hpp"
#include "synthqa/classification.hpp"
#include "synthqa/digest.hpp"
#include "synthqa/efficiency.hpp"
#include "synthqa/error.hpp"
#include "synthqa/feature_filter.hpp"
#include "synthqa/gate.hpp"
#include "synthqa/gen_metrics.hpp"
#include "synthqa/image.hpp"
#include "synthqa/intervals.hpp"
#include "synthqa/manifest.hpp"
#include "synthqa/paired_tests.hpp"
#include "synthqa/parallel.hpp"
#include "synthqa/phash.hpp"
#include "synthqa/prediction_cube.hpp"
#include "synthqa/preprocess.hpp"
#include "synthqa/training_history.hpp"

namespace synthqa::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string format_double(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(',', start), s.size());
    if (end > start) out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Output directory plus provenance bookkeeping for one subcommand run.
class Session {
 public:
  Session(std::string command, const RunConfig& config, fs::path out_dir)
      : command_(std::move(command)), config_(config), out_dir_(std::move(out_dir)) {}

  const RunConfig& config() const { return config_; }
  unsigned threads() const { return static_cast<unsigned>(config_.threads); }
  const fs::path& out_dir() const { return out_dir_; }

  void input(const std::string& role, const fs::path& path) {
    if (fs::is_directory(path)) {
      inputs_.push_back({role, path.string(), "directory"});
      return;
    }
    const auto bytes = read_file_bytes(path);
    inputs_.push_back({role, path.string(), to_hex(sha256(bytes))});
  }

  void write(const std::string& rel, std::string_view text) {
    write(rel, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

  void write(const std::string& rel, std::span<const std::uint8_t> bytes) {
    const fs::path path = out_dir_ / rel;
    write_file_bytes(path, bytes);
    std::lock_guard lock(mutex_);
    outputs_.push_back({rel, to_hex(sha256(bytes))});
  }

  // Timestamps appear here and nowhere else.
  void finish() {
    std::sort(outputs_.begin(), outputs_.end());
    ordered_json j;
    j["command"] = command_;
    j["tool"] = "synthqa";
    j["config_digest"] = config_.digest();
    j["config"] = config_.serialize();
    j["inputs"] = ordered_json::array();
    for (const auto& [role, path, digest] : inputs_)
      j["inputs"].push_back({{"role", role}, {"path", path}, {"sha256", digest}});
    j["outputs"] = ordered_json::array();
    for (const auto& [rel, digest] : outputs_) j["outputs"].push_back({{"path", rel}, {"sha256", digest}});
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
    j["created_utc"] = stamp;
    const std::string text = j.dump(2) + "\n";
    write_file_bytes(out_dir_ / (command_ + ".provenance.json"),
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

 private:
  std::string command_;
  RunConfig config_;
  fs::path out_dir_;
  std::vector<std::tuple<std::string, std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  std::mutex mutex_;
};

fs::path image_root_for(const fs::path& manifest, const std::string& flag) {
  if (!flag.empty()) return flag;
  return manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
}

fs::path resolve(const fs::path& root, const fs::path& p) { return p.is_absolute() ? p : root / p; }

std::string safe_name(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id.find('\\') != std::string::npos ||
      id == "." || id == "..")
    throw DataError("id '" + id + "' cannot be used as a file name");
  return id;
}

PreprocessConfig preprocess_config(const RunConfig& c) {
  PreprocessConfig p;
  p.mask.closing_iterations.fill(static_cast<int>(c.preprocess_closing_iterations));
  p.mask.final_closing_iterations = static_cast<int>(c.preprocess_final_closing);
  if (c.preprocess_output_size <= 0) throw ValidationError("preprocess.output_size must be positive");
  p.crop.output_size = static_cast<std::size_t>(c.preprocess_output_size);
  return p;
}

PHashOptions phash_options(const RunConfig& c) { return PHashOptions{c.phash_include_dc}; }

int png_level(const RunConfig& c) {
  if (c.preprocess_png_compression < 0 || c.preprocess_png_compression > 9)
    throw ValidationError("preprocess.png_compression must be in [0, 9]");
  return static_cast<int>(c.preprocess_png_compression);
}

// ---------------------------------------------------------------- commands

struct PreprocessArgs {
  std::string manifest, image_root;
};

int cmd_preprocess(Session& s, const PreprocessArgs& a, std::ostream& out) {
  s.input("manifest", a.manifest);
  const Manifest manifest = load_manifest(a.manifest);
  const fs::path root = image_root_for(a.manifest, a.image_root);
  const auto config = preprocess_config(s.config());
  const int level = png_level(s.config());
  const auto& records = manifest.records();
  std::vector<std::vector<std::uint8_t>> encoded(records.size());
  PreprocessTelemetry telemetry;
  telemetry.records.resize(records.size());
  parallel_for(records.size(), s.threads(), [&](std::size_t i) {
    const auto result = preprocess_image(read_png(resolve(root, records[i].path)), config);
    encoded[i] = encode_png(result.image, level);
    telemetry.records[i] = make_telemetry(records[i].id, result);
  });
  std::vector<ImageRecord> outputs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string rel = "images/" + safe_name(records[i].id) + ".png";
    s.write(rel, encoded[i]);
    ImageRecord r = records[i];
    r.path = rel;
    outputs.push_back(std::move(r));
  }
  s.write("manifest.csv", format_manifest(Manifest(std::move(outputs))));
  s.write("telemetry.jsonl", telemetry.to_jsonl());
  s.write("telemetry_summary.json", telemetry.summary_json());
  out << "preprocessed " << records.size() << " images\n";
  return kExitOk;
}

struct AuditArgs {
  std::string train, test, train_features, test_features, image_root;
  bool remove = false;
};

int cmd_audit(Session& s, const AuditArgs& a, std::ostream& out, std::ostream& err) {
  s.input("train", a.train);
  s.input("test", a.test);
  const Manifest train = load_manifest(a.train);
  const Manifest test = load_manifest(a.test);
  std::optional<FeatureMatrix> train_feats, test_feats;
  if (a.train_features.empty() != a.test_features.empty())
    throw ValidationError("--train-features and --test-features must be given together");
  if (!a.train_features.empty()) {
    s.input("train_features", a.train_features);
    s.input("test_features", a.test_features);
    train_feats = load_feature_matrix(a.train_features);
    test_feats = load_feature_matrix(a.test_features);
  }
  AuditOptions opts;
  opts.phash_max_distance = static_cast<int>(s.config().audit_phash_max_distance);
  opts.cosine_threshold = s.config().audit_cosine_threshold;
  opts.phash = phash_options(s.config());
  opts.image_root = image_root_for(a.train, a.image_root);
  opts.threads = s.threads();
  const auto report = audit(train, test, opts, train_feats ? &*train_feats : nullptr,
                            test_feats ? &*test_feats : nullptr);
  s.write("audit_report.json", report.to_json());
  s.write("removal_list.txt", report.removal_list());
  out << "exact duplicates: " << report.exact_duplicates.size()
      << ", phash neighbours: " << report.phash_neighbours.size()
      << ", feature neighbours: " << report.feature_neighbours.size()
      << ", unreadable: " << report.errors.size() << "\n";
  if (a.remove) {
    s.write("train_dedup.csv", format_manifest(remove_duplicates(train, report)));
    out << "removed " << report.removed.size() << " training images\n";
    return kExitOk;
  }
  if (report.has_exact_overlap()) {
    err << "exact train/test overlap found; rerun with --remove to drop "
        << report.removed.size() << " training images\n";
    return kExitData;
  }
  return kExitOk;
}

struct GateArgs {
  std::string candidates, references, image_root, reference_root;
  bool preprocess = false;
};

int cmd_gate(Session& s, const GateArgs& a, std::ostream& out) {
  s.input("candidates", a.candidates);
  s.input("references", a.references);
  const Manifest candidates = load_manifest(a.candidates);
  const Manifest references = load_manifest(a.references);
  const fs::path cand_root = image_root_for(a.candidates, a.image_root);
  const fs::path ref_root = image_root_for(a.references, a.reference_root);
  const auto& c = s.config();
  GateConfig gc;
  gc.min_mean_intensity = c.gate_min_mean;
  gc.min_nonzero_fraction = c.gate_min_nonzero;
  gc.max_duplicate_distance = static_cast<int>(c.gate_max_hamming);
  gc.phash = phash_options(c);
  const auto pre = preprocess_config(c);
  const int level = png_level(c);

  const auto& refs = references.records();
  std::vector<PHash> ref_hashes(refs.size());
  parallel_for(refs.size(), s.threads(), [&](std::size_t i) {
    ref_hashes[i] = phash(read_png(resolve(ref_root, refs[i].path)), gc.phash);
  });
  std::map<Stratum, std::vector<PHash>> refs_by_stratum;
  for (std::size_t i = 0; i < refs.size(); ++i) refs_by_stratum[refs[i].stratum()].push_back(ref_hashes[i]);

  // Candidates gate sequentially in id order within a stratum; strata run
  // in parallel.
  const auto& cands = candidates.records();
  std::map<Stratum, std::vector<std::size_t>> by_stratum;
  for (std::size_t i = 0; i < cands.size(); ++i) by_stratum[cands[i].stratum()].push_back(i);
  std::vector<std::pair<Stratum, std::vector<std::size_t>>> groups(by_stratum.begin(), by_stratum.end());
  std::vector<GateDecision> decisions(cands.size());
  std::vector<std::vector<std::uint8_t>> accepted_png(cands.size());
  parallel_for(groups.size(), s.threads(), [&](std::size_t g) {
    CandidateGate gate(gc, refs_by_stratum[groups[g].first]);
    for (std::size_t i : groups[g].second) {
      GrayImage img = read_png(resolve(cand_root, cands[i].path));
      if (a.preprocess) img = preprocess_image(img, pre).image;
      decisions[i] = gate.screen(cands[i].id, img);
      if (decisions[i].verdict == GateVerdict::accept) accepted_png[i] = encode_png(img, level);
    }
  });

  std::string jsonl;
  std::vector<ImageRecord> pool;
  std::map<GateVerdict, std::size_t> tally;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    jsonl += decision_to_json(decisions[i]);
    jsonl += '\n';
    ++tally[decisions[i].verdict];
    if (decisions[i].verdict != GateVerdict::accept) continue;
    const std::string rel = "pool/" + to_string(cands[i].stratum()) + "/" + safe_name(cands[i].id) + ".png";
    s.write(rel, accepted_png[i]);
    ImageRecord r = cands[i];
    r.path = rel;
    r.split = Split::train;
    r.source = Source::synthetic;
    pool.push_back(std::move(r));
  }
  s.write("decisions.jsonl", jsonl);
  const auto accepted_counts = stratum_counts(Manifest(pool));
  s.write("pool_manifest.csv", format_manifest(Manifest(std::move(pool))));

  const auto q = quota(stratum_counts(references), c.gate_rho);
  ordered_json qj;
  qj["rho"] = c.gate_rho;
  qj["total"] = q.total;
  qj["strata"] = ordered_json::object();
  for (const auto& [stratum, n] : q.quotas) {
    const auto it = accepted_counts.find(stratum);
    const std::size_t accepted = it == accepted_counts.end() ? 0 : it->second;
    qj["strata"][to_string(stratum)] = {{"quota", n}, {"accepted", accepted}, {"met", accepted >= n}};
  }
  s.write("quota.json", qj.dump(2) + "\n");
  for (const auto& [verdict, n] : tally) out << to_string(verdict) << ": " << n << "\n";
  return kExitOk;
}

struct FilterArgs {
  std::string real, real_features, pool, pool_features, ratios = "1,2";
};

std::string ratio_tag(double r) { return format_double(r, "%g"); }

int cmd_filter(Session& s, const FilterArgs& a, std::ostream& out) {
  s.input("real", a.real);
  s.input("real_features", a.real_features);
  s.input("pool", a.pool);
  s.input("pool_features", a.pool_features);
  std::vector<double> ratios;
  for (const auto& tok : split_list(a.ratios)) {
    try {
      std::size_t used = 0;
      ratios.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ValidationError("bad ratio '" + tok + "'");
    }
  }
  if (ratios.empty()) throw ValidationError("--ratios is empty");
  FilterConfig fc;
  fc.quantile = s.config().filter_quantile;
  if (s.config().filter_max_components <= 0) throw ValidationError("filter.max_components must be positive");
  fc.max_components = static_cast<std::size_t>(s.config().filter_max_components);
  const auto metric = parse_fps_metric(s.config().filter_fps_metric);
  if (!metric) throw ValidationError("filter.fps_metric must be euclidean or mahalanobis");
  fc.fps_metric = *metric;
  const auto sets = build_filtered_sets(load_manifest(a.real), load_feature_matrix(a.real_features),
                                        load_manifest(a.pool), load_feature_matrix(a.pool_features),
                                        ratios, fc, s.threads());
  for (const auto& set : sets.sets) {
    s.write("filtered_r" + ratio_tag(set.ratio) + ".csv", format_manifest(set.manifest));
    out << "ratio " << ratio_tag(set.ratio) << ": " << set.manifest.size() << " images\n";
  }
  std::string report = "stratum,id,d2,pass,selection_rank\n";
  for (const auto& st : sets.strata) {
    std::istringstream lines(st.report.to_csv(false));
    for (std::string line; std::getline(lines, line);) report += to_string(st.stratum) + "," + line + "\n";
  }
  s.write("filter_report.csv", report);
  s.write("threshold_audit.json", sets.threshold_audit_json());
  return kExitOk;
}

struct SelectArgs {
  std::string snapshots;
};

int cmd_select(Session& s, const SelectArgs& a, std::ostream& out) {
  s.input("snapshots", a.snapshots);
  const auto report = format_snapshot_report(load_snapshot_table(a.snapshots), s.config().select_tie_margin);
  s.write("snapshot_report.csv", report);
  std::istringstream lines(report);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line))
    if (line.size() >= 2 && line.compare(line.size() - 2, 2, ",1") == 0) out << "selected " << line << "\n";
  return kExitOk;
}

struct GenMetricsArgs {
  std::string real, gen, generator;
  std::optional<std::int64_t> kimg;
};

int cmd_genmetrics(Session& s, const GenMetricsArgs& a, std::ostream& out) {
  s.input("real", a.real);
  s.input("gen", a.gen);
  const auto real = to_matrix(load_feature_matrix(a.real));
  const auto gen = to_matrix(load_feature_matrix(a.gen));
  const auto& c = s.config();
  if (c.kid_subsets <= 0 || c.kid_subset_max < 2 || c.pr_k <= 0)
    throw ValidationError("genmetrics settings must be positive");
  KidConfig kc;
  kc.subsets = static_cast<std::size_t>(c.kid_subsets);
  kc.subset_max = static_cast<std::size_t>(c.kid_subset_max);
  kc.seed = static_cast<std::uint64_t>(c.seed);
  kc.threads = s.threads();
  SnapshotMetrics m;
  m.generator = a.generator;
  m.kimg = a.kimg.value_or(0);
  m.fid = fid(real, gen);
  const auto k = kid(real, gen, kc);
  m.kid = k.kid;
  const auto pr = precision_recall(real, gen, static_cast<std::size_t>(c.pr_k), s.threads());
  m.precision = pr.precision;
  m.recall = pr.recall;
  ordered_json j;
  j["fid"] = m.fid;
  j["kid"] = m.kid;
  j["kid_std_error"] = k.std_error;
  j["kid_real_subset"] = k.real_subset;
  j["kid_gen_subset"] = k.gen_subset;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["k"] = c.pr_k;
  j["tier"] = std::string(to_string(m.tier()));
  j["S"] = m.composite();
  s.write("genmetrics.json", j.dump(2) + "\n");
  if (!a.generator.empty() && a.kimg) {
    const std::string row = a.generator + "," + std::to_string(m.kimg) + "," + format_double(m.fid) + "," +
                            format_double(m.kid) + "," + format_double(m.precision) + "," +
                            format_double(m.recall) + "\n";
    s.write("snapshot.csv", std::string(kSnapshotHeader) + "\n" + row);
  }
  out << "FID " << format_double(m.fid, "%.4f") << " KID " << format_double(m.kid, "%.6f") << " precision "
      << format_double(m.precision, "%.4f") << " recall " << format_double(m.recall, "%.4f") << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string predictions, baseline, classifier = "classifier", metrics;
};

int cmd_eval(Session& s, const EvalArgs& a, std::ostream& out) {
  s.input("predictions", a.predictions);
  const auto cubes = load_prediction_cubes(a.predictions);
  const auto base = cubes.find(a.baseline);
  if (base == cubes.end()) throw ValidationError("baseline condition '" + a.baseline + "' not in predictions");
  std::vector<Metric> metrics;
  if (a.metrics.empty()) {
    metrics.assign(kAllMetrics.begin(), kAllMetrics.end());
  } else {
    for (const auto& name : split_list(a.metrics)) {
      const auto m = parse_metric(name);
      if (!m) throw ValidationError("unknown metric '" + name + "'");
      metrics.push_back(*m);
    }
  }
  std::vector<PredictionCube> conditions;
  for (const auto& [name, cube] : cubes)
    if (name != a.baseline) conditions.push_back(cube);
  if (conditions.empty()) throw ValidationError("predictions hold no condition besides the baseline");
  const auto& c = s.config();
  if (c.eval_resamples <= 0) throw ValidationError("eval.resamples must be positive");
  ResampleConfig rc{static_cast<std::size_t>(c.eval_resamples), static_cast<std::uint64_t>(c.seed), s.threads()};
  const auto rows = compare_to_baseline(base->second, conditions, metrics, rc, c.eval_alpha);
  s.write("comparisons.csv", format_primary_table(a.classifier, rows));
  s.write("comparisons_full.csv", format_full_table(a.classifier, rows));

  std::string stability = "condition,seeds,mean_acc_pct,sd_pct\n";
  ordered_json confusions = ordered_json::object();
  for (const auto& [name, cube] : cubes) {
    if (cube.num_seeds() >= 2) {
      const auto st = seed_stability(cube);
      stability += name + "," + std::to_string(cube.num_seeds()) + "," + format_double(100.0 * st.mean, "%.4f") +
                   "," + format_double(100.0 * st.sd, "%.4f") + "\n";
    }
    const auto cm = confusion(cube);
    ordered_json j;
    j["seeds"] = cm.seeds;
    j["classes"] = ordered_json::array();
    for (auto cls : kAllClasses) j["classes"].push_back(std::string(to_string(cls)));
    j["mean_pct"] = cm.mean;
    j["half_ci_pct"] = cm.half_ci;
    j["empty_row"] = cm.empty_row;
    confusions[name] = j;
  }
  s.write("seed_stability.csv", stability);
  s.write("confusion.json", confusions.dump(2) + "\n");
  for (const auto& r : rows)
    if (r.metric == Metric::tumour_accuracy)
      out << r.condition << ": delta " << format_double(r.delta_pp, "%+.2f") << " pp, p_holm "
          << format_double(r.p_holm, "%.4g") << (r.significant ? " (significant)" : "") << "\n";
  return kExitOk;
}

struct VlmArgs {
  std::optional<std::int64_t> successes, trials;
  std::string outcomes;
  double level = 0.95;
  double p0 = 0.5;
};

int cmd_vlm(Session& s, const VlmArgs& a, std::ostream& out) {
  std::int64_t successes = 0, trials = 0, rows = 0;
  if (!a.outcomes.empty()) {
    if (a.successes || a.trials) throw ValidationError("give either --outcomes or --successes/--trials");
    s.input("outcomes", a.outcomes);
    std::istringstream in(read_text(a.outcomes));
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != "id,gated,correct")
      throw ParseError(a.outcomes, 1, "expected header 'id,gated,correct'");
    while (std::getline(in, line)) {
      ++line_no;
      const auto f = split_list(line);
      if (f.size() != 3 || (f[1] != "0" && f[1] != "1") || (f[2] != "0" && f[2] != "1"))
        throw ParseError(a.outcomes, line_no, "expected id,<0|1>,<0|1>");
      ++rows;
      if (f[1] == "1") {
        ++trials;
        if (f[2] == "1") ++successes;
      }
    }
  } else {
    if (!a.successes || !a.trials) throw ValidationError("--successes and --trials are required");
    successes = *a.successes;
    trials = *a.trials;
  }
  const auto ci = wilson_ci(successes, trials, a.level);
  const double p = binomial_test(successes, trials, a.p0);
  ordered_json j;
  if (rows) j["rows"] = rows;
  j["successes"] = successes;
  j["trials"] = trials;
  j["accuracy"] = static_cast<double>(successes) / static_cast<double>(trials);
  j["level"] = a.level;
  j["wilson_low"] = ci.low;
  j["wilson_high"] = ci.high;
  j["p0"] = a.p0;
  j["binomial_p"] = p;
  s.write("vlm_stats.json", j.dump(2) + "\n");
  out << "accuracy " << format_double(100.0 * successes / static_cast<double>(trials), "%.2f") << "% (Wilson "
      << format_double(100.0 * ci.low, "%.2f") << "-" << format_double(100.0 * ci.high, "%.2f")
      << "%), binomial p " << format_double(p, "%.3g") << "\n";
  return kExitOk;
}

struct EfficiencyArgs {
  std::string baseline;
  std::vector<std::string> conditions;
  std::string mode;
  std::optional<std::int64_t> n_real;
};

std::vector<TrainingHistory> load_histories(Session& s, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .jsonl histories in " + dir.string());
  std::vector<TrainingHistory> out;
  for (const auto& f : files) {
    s.input("history", f);
    out.push_back(load_training_history(f));
  }
  return out;
}

int cmd_efficiency(Session& s, const EfficiencyArgs& a, std::ostream& out) {
  const std::string mode_name = a.mode.empty() ? s.config().efficiency_mode : a.mode;
  EffortMode mode;
  if (mode_name == "epoch") mode = EffortMode::epoch;
  else if (mode_name == "real_epoch") mode = EffortMode::real_epoch;
  else throw ValidationError("efficiency mode must be epoch or real_epoch");
  const std::int64_t n_real = a.n_real.value_or(s.config().efficiency_n_real);
  const auto baseline = load_histories(s, a.baseline);
  std::vector<EffortComparison> rows;
  for (const auto& dir : a.conditions) {
    auto cmp = compare_effort(baseline, load_histories(s, dir), mode, n_real);
    if (cmp.condition.empty()) cmp.condition = fs::path(dir).filename().string();
    rows.push_back(std::move(cmp));
  }
  const auto table = format_effort_table(rows, mode);
  s.write("efficiency.csv", table);
  out << table;
  return kExitOk;
}

struct ReportArgs {
  std::string manifest;
  std::optional<double> rho;
};

int cmd_report(Session& s, const ReportArgs& a, std::ostream& out) {
  s.input("manifest", a.manifest);
  const auto counts = stratum_counts(load_manifest(a.manifest));
  std::string table = "class,axial,coronal,sagittal,total\n";
  std::map<Plane, std::size_t> column;
  std::size_t grand = 0;
  for (auto cls : kAllClasses) {
    table += std::string(to_string(cls));
    std::size_t row = 0;
    for (auto plane : kAllPlanes) {
      const auto it = counts.find({cls, plane});
      const std::size_t n = it == counts.end() ? 0 : it->second;
      table += "," + std::to_string(n);
      row += n;
      column[plane] += n;
    }
    grand += row;
    table += "," + std::to_string(row) + "\n";
  }
  table += "total";
  for (auto plane : kAllPlanes) table += "," + std::to_string(column[plane]);
  table += "," + std::to_string(grand) + "\n";
  s.write("strata.csv", table);

  const double rho = a.rho.value_or(s.config().gate_rho);
  const auto q = quota(counts, rho);
  std::string quotas = "stratum,count,quota\n";
  for (const auto& [stratum, n] : q.quotas)
    quotas += to_string(stratum) + "," + std::to_string(counts.at(stratum)) + "," + std::to_string(n) + "\n";
  quotas += "total," + std::to_string(grand) + "," + std::to_string(q.total) + "\n";
  s.write("quotas.csv", quotas);
  out << table << "\n" << quotas;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic-augmentation QA pipeline for class/plane-stratified MRI slice datasets", "synthqa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "synthqa 0.1.0");

  std::string config_path, out_dir = "synthqa-out";
  std::optional<std::int64_t> seed_flag, threads_flag;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed_flag, "Base RNG seed");
  app.add_option("--threads", threads_flag, "Worker threads (0 = all cores)");
  app.add_option("--out-dir", out_dir, "Artifact directory");
  app.add_option("--set", overrides, "Override a config key (key=value); repeatable");

  std::function<int(Session&)> action;
  std::string command;
  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    s->callback([&command, name] { command = name; });
    return s;
  };

  PreprocessArgs pre;
  auto* p = sub("preprocess", "Harmonise images: mask, normalise, crop, resize, sharpen");
  p->add_option("--manifest", pre.manifest)->required()->check(CLI::ExistingFile);
  p->add_option("--image-root", pre.image_root, "Base for relative paths (default: manifest dir)");

  AuditArgs aud;
  auto* au = sub("audit", "Train/test leakage audit");
  au->add_option("--train", aud.train)->required()->check(CLI::ExistingFile);
  au->add_option("--test", aud.test)->required()->check(CLI::ExistingFile);
  au->add_option("--train-features", aud.train_features)->check(CLI::ExistingFile);
  au->add_option("--test-features", aud.test_features)->check(CLI::ExistingFile);
  au->add_option("--image-root", aud.image_root);
  au->add_flag("--remove", aud.remove, "Write a deduplicated training manifest");

  GateArgs gate;
  auto* g = sub("gate", "Screen generated candidates (blank and pHash duplicate rejection)");
  g->add_option("--candidates", gate.candidates)->required()->check(CLI::ExistingFile);
  g->add_option("--references", gate.references, "Real training manifest")->required()->check(CLI::ExistingFile);
  g->add_option("--image-root", gate.image_root);
  g->add_option("--reference-root", gate.reference_root);
  g->add_flag("--preprocess", gate.preprocess, "Harmonise candidates before screening");

  FilterArgs filt;
  auto* f = sub("filter", "Mahalanobis gate and farthest-point selection of nested synthetic sets");
  f->add_option("--real", filt.real)->required()->check(CLI::ExistingFile);
  f->add_option("--real-features", filt.real_features)->required()->check(CLI::ExistingFile);
  f->add_option("--pool", filt.pool)->required()->check(CLI::ExistingFile);
  f->add_option("--pool-features", filt.pool_features)->required()->check(CLI::ExistingFile);
  f->add_option("--ratios", filt.ratios, "Synthetic:real ratios, comma separated")->capture_default_str();

  SelectArgs sel;
  auto* sc = sub("select-checkpoint", "Tier-gated composite checkpoint selection");
  sc->add_option("--snapshots", sel.snapshots)->required()->check(CLI::ExistingFile);

  GenMetricsArgs gm;
  auto* gmc = sub("genmetrics", "FID, KID and manifold precision/recall between feature files");
  gmc->add_option("--real", gm.real)->required()->check(CLI::ExistingFile);
  gmc->add_option("--gen", gm.gen)->required()->check(CLI::ExistingFile);
  gmc->add_option("--generator", gm.generator, "Generator label for snapshot.csv");
  gmc->add_option("--kimg", gm.kimg, "Snapshot kimg for snapshot.csv");

  EvalArgs ev;
  auto* e = sub("eval", "Paired permutation tests, bootstrap CIs and Holm correction");
  e->add_option("--predictions", ev.predictions)->required()->check(CLI::ExistingFile);
  e->add_option("--baseline", ev.baseline, "Baseline condition name")->required();
  e->add_option("--classifier", ev.classifier)->capture_default_str();
  e->add_option("--metrics", ev.metrics, "Comma-separated metric family (default: all eight)");

  VlmArgs vlm;
  auto* v = sub("vlm-stats", "Wilson interval and binomial test for a real-vs-synthetic audit");
  v->add_option("--successes", vlm.successes);
  v->add_option("--trials", vlm.trials);
  v->add_option("--outcomes", vlm.outcomes, "CSV id,gated,correct")->check(CLI::ExistingFile);
  v->add_option("--level", vlm.level)->capture_default_str();
  v->add_option("--p0", vlm.p0)->capture_default_str();

  EfficiencyArgs eff;
  auto* ef = sub("efficiency", "Selected-checkpoint effort versus a baseline, paired by seed");
  ef->add_option("--baseline", eff.baseline, "Directory of baseline histories")->required();
  ef->add_option("--condition", eff.conditions, "Directory of condition histories; repeatable")->required();
  ef->add_option("--mode", eff.mode, "epoch or real_epoch");
  ef->add_option("--n-real", eff.n_real, "Real training rows");

  ReportArgs rep;
  auto* r = sub("report", "Stratum table and candidate quotas for a manifest");
  r->add_option("--manifest", rep.manifest)->required()->check(CLI::ExistingFile);
  r->add_option("--rho", rep.rho);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) apply_config_text(config, read_text(config_path), config_path);
    apply_env(config);
    if (seed_flag) config.seed = *seed_flag;
    if (threads_flag) config.threads = *threads_flag;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + o + "'");
      config.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (config.threads < 0) throw ValidationError("threads must be >= 0");

    Session session(command, config, out_dir);
    if (!config_path.empty()) session.input("config", config_path);
    int code = kExitOk;
    if (command == "preprocess") code = cmd_preprocess(session, pre, out);
    else if (command == "audit") code = cmd_audit(session, aud, out, err);
    else if (command == "gate") code = cmd_gate(session, gate, out);
    else if (command == "filter") code = cmd_filter(session, filt, out);
    else if (command == "select-checkpoint") code = cmd_select(session, sel, out);
    else if (command == "genmetrics") code = cmd_genmetrics(session, gm, out);
    else if (command == "eval") code = cmd_eval(session, ev, out);
    else if (command == "vlm-stats") code = cmd_vlm(session, vlm, out);
    else if (command == "efficiency") code = cmd_efficiency(session, eff, out);
    else if (command == "report") code = cmd_report(session, rep, out);
    session.finish();
    return code;
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const DataError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  }
}

}  // namespace synthqa::cli
