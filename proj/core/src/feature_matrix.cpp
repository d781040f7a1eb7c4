#include "synthqa/feature_matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "synthqa/error.hpp"
#include "text_util.hpp"

namespace synthqa {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> ids, std::size_t dim,
                             std::vector<float> data, std::string feature)
    : ids_(std::move(ids)), dim_(dim), data_(std::move(data)), feature_(std::move(feature)) {
  if (dim_ == 0) throw ValidationError("feature dim must be positive");
  if (data_.size() != ids_.size() * dim_) {
    throw ValidationError("feature payload has " + std::to_string(data_.size()) +
                          " values, expected " + std::to_string(ids_.size() * dim_));
  }
}

std::size_t FeatureMatrix::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  return ids_.size();
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) index.emplace(ids_[i], i);
  std::vector<float> out;
  out.reserve(ids.size() * dim_);
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("feature matrix has no row for id '" + id + "'");
    auto r = row(it->second);
    out.insert(out.end(), r.begin(), r.end());
  }
  return FeatureMatrix(ids, dim_, std::move(out), feature_);
}

bool FeatureMatrix::operator==(const FeatureMatrix& other) const {
  return ids_ == other.ids_ && dim_ == other.dim_ && feature_ == other.feature_ &&
         data_.size() == other.data_.size() &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

std::string encode_feature_matrix(const FeatureMatrix& m) {
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    if (!std::isfinite(m.data()[i])) {
      throw ValidationError("non-finite feature value at row " + std::to_string(i / m.dim()));
    }
  }
  nlohmann::ordered_json header;
  header["magic"] = kFeatureMagic;
  header["n"] = m.rows();
  header["d"] = m.dim();
  header["dtype"] = "f32le";
  header["feature"] = m.feature();
  header["ids"] = m.ids();
  std::string out = header.dump();
  out += '\n';
  const std::size_t header_size = out.size();
  out.resize(header_size + 4 * m.data().size());
  char* payload = out.data() + header_size;
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(m.data()[i]));
    std::memcpy(payload + 4 * i, &bits, 4);
  }
  return out;
}

FeatureMatrix decode_feature_matrix(std::string_view bytes, const std::string& source) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw DataError(source + ": missing FEAT1 header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed FEAT1 header: " + e.what());
  }
  if (!header.is_object() || header.value("magic", "") != kFeatureMagic) {
    throw DataError(source + ": magic mismatch (expected FEAT1)");
  }
  if (header.value("dtype", "") != "f32le") {
    throw DataError(source + ": unsupported dtype (expected f32le)");
  }
  std::size_t n = 0, d = 0;
  std::vector<std::string> ids;
  std::string feature;
  try {
    n = header.at("n").get<std::size_t>();
    d = header.at("d").get<std::size_t>();
    ids = header.at("ids").get<std::vector<std::string>>();
    feature = header.value("feature", "");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": bad FEAT1 header field: " + e.what());
  }
  if (d == 0) throw DataError(source + ": header declares d = 0");
  if (ids.size() != n) {
    throw DataError(source + ": header declares n = " + std::to_string(n) + " but lists " +
                    std::to_string(ids.size()) + " ids");
  }
  if (feature == "pool3" && d != kPool3Dim) {
    throw DataError(source + ": pool3 features must have d = 2048, found " + std::to_string(d));
  }
  const std::string_view payload = bytes.substr(newline + 1);
  const std::size_t expected = 4 * n * d;
  if (payload.size() != expected) {
    throw DataError(source + ": payload is " + std::to_string(payload.size()) +
                    " bytes, header implies " + std::to_string(expected));
  }
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, payload.data() + 4 * i, 4);
    data[i] = std::bit_cast<float>(to_little_endian(bits));
    if (!std::isfinite(data[i])) {
      throw DataError(source + ": non-finite value at row " + std::to_string(i / d));
    }
  }
  return FeatureMatrix(std::move(ids), d, std::move(data), std::move(feature));
}

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  detail::write_text_file(path, encode_feature_matrix(m));
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  return decode_feature_matrix(detail::read_text_file(path), path.string());
}

}  // namespace synthqa
