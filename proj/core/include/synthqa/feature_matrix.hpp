#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace synthqa {

// n x dim row-major matrix of per-image embeddings, stored as 32-bit floats,
// with one id per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  // Throws ValidationError if dim == 0 or data.size() != ids.size() * dim.
  FeatureMatrix(std::vector<std::string> ids, std::size_t dim, std::vector<float> data,
                std::string feature = {});

  std::size_t rows() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<float>& data() const noexcept { return data_; }
  const std::string& feature() const noexcept { return feature_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  // Row index of `id`, or rows() when absent. Linear scan.
  std::size_t index_of(std::string_view id) const;

  // Rows for `ids`, in the given order. Throws DataError on a missing id.
  FeatureMatrix select(const std::vector<std::string>& ids) const;

  // Bitwise equality of ids, dim, feature name and payload.
  bool operator==(const FeatureMatrix& other) const;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::string feature_;
};

inline constexpr std::string_view kFeatureMagic = "FEAT1";
inline constexpr std::size_t kPool3Dim = 2048;

// FEAT1 container: one JSON header line terminated by LF, then exactly
// 4*n*d bytes of little-endian float32 in row-major order.
void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

std::string encode_feature_matrix(const FeatureMatrix& m);
FeatureMatrix decode_feature_matrix(std::string_view bytes, const std::string& source = "<feat>");

}  // namespace synthqa
