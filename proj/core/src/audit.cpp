#include "synthqa/audit.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "synthqa/digest.hpp"
#include "synthqa/error.hpp"
#include "synthqa/parallel.hpp"

namespace synthqa {

std::string_view to_string(Evidence e) {
  switch (e) {
    case Evidence::path: return "path";
    case Evidence::basename: return "basename";
    case Evidence::sha256: return "sha256";
    case Evidence::pixel_exact: return "pixel_exact";
    case Evidence::pixel_hash: return "pixel_hash";
  }
  return "?";
}

double cosine_distance(std::span<const float> x, std::span<const float> y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += static_cast<double>(x[i]) * y[i];
    nx += static_cast<double>(x[i]) * x[i];
    ny += static_cast<double>(y[i]) * y[i];
  }
  if (nx == 0.0 || ny == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
}

namespace {

struct Fingerprint {
  bool ok = false;
  std::string error;
  std::string path_key;
  std::string basename;
  Sha256 file_sha{};
  Sha256 pixel_sha{};
  PHash phash;
};

std::filesystem::path resolve(const std::filesystem::path& root, const std::filesystem::path& p) {
  if (p.is_absolute() || root.empty()) return p;
  return root / p;
}

std::vector<Fingerprint> fingerprint_all(const Manifest& m, const AuditOptions& options) {
  std::vector<Fingerprint> out(m.size());
  parallel_for(m.size(), options.threads, [&](std::size_t i) {
    const auto& rec = m.records()[i];
    Fingerprint& fp = out[i];
    const auto full = resolve(options.image_root, rec.path);
    fp.path_key = full.lexically_normal().generic_string();
    fp.basename = rec.path.filename().string();
    try {
      const auto bytes = read_file_bytes(full);
      fp.file_sha = sha256(bytes);
      const GrayImage img = decode_png(bytes);
      fp.pixel_sha = sha256(img.pixels);
      fp.phash = phash(img, options.phash);
      fp.ok = true;
    } catch (const std::exception& e) {
      fp.error = e.what();
    }
  });
  return out;
}

template <typename Key>
std::unordered_multimap<Key, std::size_t> index_by(const std::vector<Fingerprint>& fps,
                                                   Key Fingerprint::*field, bool require_ok) {
  std::unordered_multimap<Key, std::size_t> idx;
  for (std::size_t i = 0; i < fps.size(); ++i)
    if (!require_ok || fps[i].ok) idx.emplace(fps[i].*field, i);
  return idx;
}

struct ShaKeyHash {
  std::size_t operator()(const Sha256& s) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | s[i];
    return h;
  }
};

bool same_pixels(const std::filesystem::path& a, const std::filesystem::path& b) {
  const GrayImage ia = read_png(a);
  const GrayImage ib = read_png(b);
  return ia == ib;
}

}  // namespace

AuditReport audit(const Manifest& train, const Manifest& test, const AuditOptions& options,
                  const FeatureMatrix* train_features, const FeatureMatrix* test_features) {
  auto single_split = [](const Manifest& m) -> std::optional<Split> {
    if (m.empty()) return std::nullopt;
    const Split s = m.records().front().split;
    for (const auto& r : m.records())
      if (r.split != s) throw ValidationError("audit: manifest mixes train and test records");
    return s;
  };
  const auto train_split = single_split(train);
  const auto test_split = single_split(test);
  if (train_split && test_split && *train_split == *test_split)
    throw ValidationError("audit: both manifests carry the same split label");

  AuditReport report;
  const auto train_fp = fingerprint_all(train, options);
  const auto test_fp = fingerprint_all(test, options);
  for (std::size_t i = 0; i < train_fp.size(); ++i)
    if (!train_fp[i].ok) report.errors.push_back({train.records()[i].id, train_fp[i].error});
  for (std::size_t j = 0; j < test_fp.size(); ++j)
    if (!test_fp[j].ok) report.errors.push_back({test.records()[j].id, test_fp[j].error});

  const auto by_path = index_by(test_fp, &Fingerprint::path_key, false);
  const auto by_base = index_by(test_fp, &Fingerprint::basename, false);
  std::unordered_multimap<Sha256, std::size_t, ShaKeyHash> by_file, by_pixels;
  for (std::size_t j = 0; j < test_fp.size(); ++j) {
    if (!test_fp[j].ok) continue;
    by_file.emplace(test_fp[j].file_sha, j);
    by_pixels.emplace(test_fp[j].pixel_sha, j);
  }

  // Per-train-record results, merged in record order afterwards.
  struct Partial {
    std::vector<ExactMatch> exact;
    std::vector<PHashNeighbour> phash;
    std::vector<FeatureNeighbour> feature;
    std::optional<std::string> error;
  };
  std::vector<Partial> partial(train.size());

  std::vector<std::size_t> test_feature_rows;
  std::vector<double> test_norms;
  std::vector<std::size_t> train_feature_rows;
  const bool use_features = train_features != nullptr && test_features != nullptr;
  if (use_features) {
    if (train_features->dim() != test_features->dim())
      throw ValidationError("audit: train/test feature dims differ");
    std::unordered_map<std::string_view, std::size_t> tr, te;
    for (std::size_t i = 0; i < train_features->rows(); ++i) tr.emplace(train_features->ids()[i], i);
    for (std::size_t j = 0; j < test_features->rows(); ++j) te.emplace(test_features->ids()[j], j);
    auto lookup = [](const auto& map, const std::string& id) {
      auto it = map.find(id);
      return it == map.end() ? SIZE_MAX : it->second;
    };
    for (const auto& r : train.records()) {
      train_feature_rows.push_back(lookup(tr, r.id));
      if (train_feature_rows.back() == SIZE_MAX)
        report.errors.push_back({r.id, "no feature row for record"});
    }
    for (const auto& r : test.records()) {
      test_feature_rows.push_back(lookup(te, r.id));
      if (test_feature_rows.back() == SIZE_MAX)
        report.errors.push_back({r.id, "no feature row for record"});
    }
  }

  parallel_for(train.size(), options.threads, [&](std::size_t i) {
    const auto& fp = train_fp[i];
    const auto& train_id = train.records()[i].id;
    Partial& out = partial[i];
    auto add_matches = [&](const auto& index, const auto& key, Evidence ev) {
      auto [lo, hi] = index.equal_range(key);
      for (auto it = lo; it != hi; ++it) out.exact.push_back({train_id, test.records()[it->second].id, ev});
    };
    add_matches(by_path, fp.path_key, Evidence::path);
    add_matches(by_base, fp.basename, Evidence::basename);
    if (fp.ok) {
      add_matches(by_file, fp.file_sha, Evidence::sha256);
      add_matches(by_pixels, fp.pixel_sha, Evidence::pixel_hash);
      auto [lo, hi] = by_pixels.equal_range(fp.pixel_sha);
      for (auto it = lo; it != hi; ++it) {
        const auto& test_rec = test.records()[it->second];
        try {
          if (same_pixels(resolve(options.image_root, train.records()[i].path),
                          resolve(options.image_root, test_rec.path)))
            out.exact.push_back({train_id, test_rec.id, Evidence::pixel_exact});
        } catch (const std::exception& e) {
          out.error = e.what();
        }
      }
      for (std::size_t j = 0; j < test_fp.size(); ++j) {
        if (!test_fp[j].ok) continue;
        const int d = hamming(fp.phash, test_fp[j].phash);
        if (d <= options.phash_max_distance) out.phash.push_back({train_id, test.records()[j].id, d});
      }
    }
    if (use_features && train_feature_rows[i] != SIZE_MAX) {
      const auto x = train_features->row(train_feature_rows[i]);
      for (std::size_t j = 0; j < test_feature_rows.size(); ++j) {
        if (test_feature_rows[j] == SIZE_MAX) continue;
        const double d = cosine_distance(x, test_features->row(test_feature_rows[j]));
        if (d < options.cosine_threshold)
          out.feature.push_back({train_id, test.records()[j].id, d});
      }
    }
  });

  for (std::size_t i = 0; i < partial.size(); ++i) {
    auto& p = partial[i];
    report.exact_duplicates.insert(report.exact_duplicates.end(), p.exact.begin(), p.exact.end());
    report.phash_neighbours.insert(report.phash_neighbours.end(), p.phash.begin(), p.phash.end());
    report.feature_neighbours.insert(report.feature_neighbours.end(), p.feature.begin(), p.feature.end());
    if (p.error) report.errors.push_back({train.records()[i].id, *p.error});
  }
  std::sort(report.exact_duplicates.begin(), report.exact_duplicates.end(),
            [](const ExactMatch& a, const ExactMatch& b) {
              return std::tie(a.train_id, a.test_id, a.evidence) <
                     std::tie(b.train_id, b.test_id, b.evidence);
            });
  std::sort(report.phash_neighbours.begin(), report.phash_neighbours.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.train_id, a.test_id) < std::tie(b.train_id, b.test_id);
            });
  std::sort(report.feature_neighbours.begin(), report.feature_neighbours.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.train_id, a.test_id) < std::tie(b.train_id, b.test_id);
            });
  std::stable_sort(report.errors.begin(), report.errors.end(),
                   [](const RecordError& a, const RecordError& b) { return a.id < b.id; });

  for (const auto& m : report.exact_duplicates) {
    if (m.evidence != Evidence::pixel_exact) continue;
    if (!report.removed.empty() && report.removed.back() == m.train_id) continue;
    report.removed.push_back(m.train_id);
  }
  for (const auto& id : report.removed) {
    const ImageRecord* r = train.find(id);
    ++report.removed_by_class[r->tumour_class];
    ++report.removed_by_plane[r->plane];
  }
  return report;
}

Manifest remove_duplicates(const Manifest& train, const AuditReport& report) {
  std::vector<std::string> missing;
  for (const auto& id : report.removed)
    if (!train.contains(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "removal ids absent from train manifest:";
    for (const auto& id : missing) msg += " " + id;
    throw DataError(msg);
  }
  std::vector<ImageRecord> kept;
  kept.reserve(train.size());
  for (const auto& r : train.records())
    if (!std::binary_search(report.removed.begin(), report.removed.end(), r.id)) kept.push_back(r);
  return Manifest(std::move(kept), train.provenance());
}

std::string AuditReport::to_json() const {
  nlohmann::ordered_json j;
  j["exact_duplicates"] = nlohmann::ordered_json::array();
  for (const auto& m : exact_duplicates)
    j["exact_duplicates"].push_back(
        {{"train_id", m.train_id}, {"test_id", m.test_id}, {"evidence", to_string(m.evidence)}});
  j["phash_neighbours"] = nlohmann::ordered_json::array();
  for (const auto& n : phash_neighbours)
    j["phash_neighbours"].push_back(
        {{"train_id", n.train_id}, {"test_id", n.test_id}, {"hamming", n.distance}});
  j["feature_neighbours"] = nlohmann::ordered_json::array();
  for (const auto& n : feature_neighbours)
    j["feature_neighbours"].push_back(
        {{"train_id", n.train_id}, {"test_id", n.test_id}, {"cosine_distance", n.cosine_distance}});
  j["removed"] = removed;
  nlohmann::ordered_json by_class = nlohmann::ordered_json::object();
  for (const auto& [c, n] : removed_by_class) by_class[std::string(to_string(c))] = n;
  nlohmann::ordered_json by_plane = nlohmann::ordered_json::object();
  for (const auto& [p, n] : removed_by_plane) by_plane[std::string(to_string(p))] = n;
  j["removed_by_class"] = by_class;
  j["removed_by_plane"] = by_plane;
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : errors) j["errors"].push_back({{"id", e.id}, {"message", e.message}});
  return j.dump(2) + "\n";
}

std::string AuditReport::removal_list() const {
  std::string out;
  for (const auto& id : removed) out += id + "\n";
  return out;
}

}  // namespace synthqa
