#include "synthqa/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "synthqa/error.hpp"
#include "text_util.hpp"

namespace synthqa {

std::string_view to_string(Split v) { return v == Split::train ? "train" : "test"; }
std::string_view to_string(Source v) { return v == Source::real ? "real" : "synthetic"; }

std::string_view to_string(TumourClass v) {
  switch (v) {
    case TumourClass::glioma: return "glioma";
    case TumourClass::meningioma: return "meningioma";
    case TumourClass::no_tumour: return "no_tumour";
    case TumourClass::pituitary: return "pituitary";
  }
  return "?";
}

std::string_view to_string(Plane v) {
  switch (v) {
    case Plane::axial: return "axial";
    case Plane::coronal: return "coronal";
    case Plane::sagittal: return "sagittal";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view s) {
  if (s == "real") return Source::real;
  if (s == "synthetic") return Source::synthetic;
  return std::nullopt;
}

std::optional<TumourClass> parse_class(std::string_view s) {
  for (auto c : kAllClasses)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<Plane> parse_plane(std::string_view s) {
  for (auto p : kAllPlanes)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::string to_string(const Stratum& s) {
  return std::string(to_string(s.tumour_class)) + "_" + std::string(to_string(s.plane));
}

Manifest::Manifest(std::vector<ImageRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  std::stable_sort(records_.begin(), records_.end(),
                   [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
  std::vector<std::string> duplicates;
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].id == records_[i - 1].id &&
        (duplicates.empty() || duplicates.back() != records_[i].id)) {
      duplicates.push_back(records_[i].id);
    }
  }
  if (!duplicates.empty()) {
    std::string msg = "duplicate manifest ids:";
    for (const auto& id : duplicates) msg += " " + id;
    throw DataError(msg);
  }
}

const ImageRecord* Manifest::find(std::string_view id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const ImageRecord& r, std::string_view key) { return r.id < key; });
  if (it == records_.end() || it->id != id) return nullptr;
  return &*it;
}

namespace {

template <typename T, typename Parser>
T parse_enum(Parser parser, std::string_view field, std::string_view name,
             const std::string& source, std::size_t line) {
  auto v = parser(field);
  if (!v) {
    throw ParseError(source, line,
                     "unknown " + std::string(name) + " value '" + std::string(field) + "'");
  }
  return *v;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::string& source_name) {
  auto lines = detail::split_lines(text, source_name);
  if (lines.empty() || lines.front() != kManifestHeader) {
    throw ParseError(source_name, 1,
                     "expected header '" + std::string(kManifestHeader) + "'");
  }
  std::vector<ImageRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto fields = detail::split_fields(lines[i]);
    if (fields.size() != 6) {
      throw ParseError(source_name, line_no,
                       "expected 6 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(source_name, line_no, "empty id");
    if (fields[1].empty()) throw ParseError(source_name, line_no, "empty path");
    ImageRecord rec;
    rec.id = std::string(fields[0]);
    rec.path = std::filesystem::path(std::string(fields[1]));
    rec.split = parse_enum<Split>(parse_split, fields[2], "split", source_name, line_no);
    rec.source = parse_enum<Source>(parse_source, fields[3], "source", source_name, line_no);
    rec.tumour_class =
        parse_enum<TumourClass>(parse_class, fields[4], "class", source_name, line_no);
    rec.plane = parse_enum<Plane>(parse_plane, fields[5], "plane", source_name, line_no);
    records.push_back(std::move(rec));
  }
  try {
    return Manifest(std::move(records), "loaded from " + source_name);
  } catch (const DataError& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(detail::read_text_file(path), path.string());
}

std::string format_manifest(const Manifest& manifest) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& r : manifest.records()) {
    const std::string path = r.path.generic_string();
    if (r.id.find_first_of(",\n\r") != std::string::npos ||
        path.find_first_of(",\n\r") != std::string::npos) {
      throw ValidationError("manifest id/path may not contain commas or newlines: " + r.id);
    }
    out += r.id;
    out += ',';
    out += path;
    out += ',';
    out += to_string(r.split);
    out += ',';
    out += to_string(r.source);
    out += ',';
    out += to_string(r.tumour_class);
    out += ',';
    out += to_string(r.plane);
    out += '\n';
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  detail::write_text_file(path, format_manifest(manifest));
}

StratumCounts stratum_counts(const Manifest& manifest) {
  StratumCounts counts;
  for (const auto& r : manifest.records()) ++counts[r.stratum()];
  return counts;
}

std::map<TumourClass, std::size_t> class_totals(const StratumCounts& counts) {
  std::map<TumourClass, std::size_t> out;
  for (const auto& [s, n] : counts) out[s.tumour_class] += n;
  return out;
}

std::map<Plane, std::size_t> plane_totals(const StratumCounts& counts) {
  std::map<Plane, std::size_t> out;
  for (const auto& [s, n] : counts) out[s.plane] += n;
  return out;
}

}  // namespace synthqa
