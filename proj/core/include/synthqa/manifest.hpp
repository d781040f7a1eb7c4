#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synthqa {

enum class Split { train, test };
enum class Source { real, synthetic };
enum class TumourClass { glioma, meningioma, no_tumour, pituitary };
enum class Plane { axial, coronal, sagittal };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::size_t kNumPlanes = 3;
inline constexpr std::array<TumourClass, kNumClasses> kAllClasses = {
    TumourClass::glioma, TumourClass::meningioma, TumourClass::no_tumour, TumourClass::pituitary};
inline constexpr std::array<Plane, kNumPlanes> kAllPlanes = {Plane::axial, Plane::coronal,
                                                             Plane::sagittal};

std::string_view to_string(Split v);
std::string_view to_string(Source v);
std::string_view to_string(TumourClass v);
std::string_view to_string(Plane v);

std::optional<Split> parse_split(std::string_view s);
std::optional<Source> parse_source(std::string_view s);
std::optional<TumourClass> parse_class(std::string_view s);
std::optional<Plane> parse_plane(std::string_view s);

// One of the twelve class x plane partitions.
struct Stratum {
  TumourClass tumour_class;
  Plane plane;

  auto operator<=>(const Stratum&) const = default;
};

std::string to_string(const Stratum& s);  // "glioma_axial"

struct ImageRecord {
  std::string id;
  std::filesystem::path path;
  Split split;
  Source source;
  TumourClass tumour_class;
  Plane plane;

  Stratum stratum() const { return {tumour_class, plane}; }
  bool operator==(const ImageRecord&) const = default;
};

// Records are kept sorted by id (bytewise) and ids are unique.
class Manifest {
 public:
  Manifest() = default;
  // Sorts the records; throws DataError on duplicate ids.
  explicit Manifest(std::vector<ImageRecord> records, std::string provenance = {});

  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const ImageRecord* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  bool operator==(const Manifest& other) const { return records_ == other.records_; }

 private:
  std::vector<ImageRecord> records_;
  std::string provenance_;
};

inline constexpr std::string_view kManifestHeader = "id,path,split,source,class,plane";

// Parses manifest CSV text. `source_name` labels error messages.
Manifest parse_manifest(std::string_view text, const std::string& source_name = "<manifest>");
Manifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const Manifest& manifest);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

using StratumCounts = std::map<Stratum, std::size_t>;

StratumCounts stratum_counts(const Manifest& manifest);

// Per-class totals derived from stratum counts.
std::map<TumourClass, std::size_t> class_totals(const StratumCounts& counts);
std::map<Plane, std::size_t> plane_totals(const StratumCounts& counts);

}  // namespace synthqa
