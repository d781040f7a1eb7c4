#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <unistd.h>

#include "synthqa/random.hpp"

namespace synthqa::fx {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const auto base = fs::temp_directory_path();
  for (;;) {
    char name[64];
    std::snprintf(name, sizeof name, "synthqa-test-%d-%u", static_cast<int>(::getpid()), counter++);
    path_ = base / name;
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string id_for(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu", i);
  return prefix + buf;
}

GrayImage synthetic_slice(std::uint64_t seed, std::size_t width, std::size_t height) {
  auto rng = stream_engine(seed, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cx = width * (0.45 + 0.1 * u(rng));
  const double cy = height * (0.45 + 0.1 * u(rng));
  const double ax = width * (0.30 + 0.08 * u(rng));
  const double ay = height * (0.33 + 0.08 * u(rng));
  const double lx = cx + ax * (u(rng) - 0.5) * 0.8;
  const double ly = cy + ay * (u(rng) - 0.5) * 0.8;
  const double lr = std::min(width, height) * (0.05 + 0.05 * u(rng));
  const double phase = 6.283 * u(rng);
  GrayImage img(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = (x + 0.5 - cx) / ax;
      const double dy = (y + 0.5 - cy) / ay;
      const double r = std::sqrt(dx * dx + dy * dy);
      double v;
      if (r <= 0.92) {
        v = 95.0 + 45.0 * std::sin(0.21 * x + phase) * std::cos(0.17 * y) + 20.0 * u(rng);
        const double ld = std::hypot(x + 0.5 - lx, y + 0.5 - ly);
        if (ld < lr) v += 80.0;
      } else if (r <= 1.0) {
        v = 210.0 + 20.0 * u(rng);
      } else {
        v = 6.0 * u(rng);
      }
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

Corpus write_corpus(const fs::path& dir, std::size_t n, std::uint64_t seed, Split split,
                    const std::string& prefix, Source source) {
  std::vector<ImageRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    ImageRecord r;
    r.id = id_for(prefix, i);
    r.path = fs::path(prefix) / (r.id + ".png");
    r.split = split;
    r.source = source;
    r.tumour_class = kAllClasses[i % kNumClasses];
    r.plane = kAllPlanes[(i / kNumClasses) % kNumPlanes];
    write_png(synthetic_slice(seed * 1000003 + i), dir / r.path);
    records.push_back(std::move(r));
  }
  Corpus c;
  c.manifest = Manifest(std::move(records));
  c.manifest_path = dir / (prefix + "_manifest.csv");
  write_manifest(c.manifest, c.manifest_path);
  return c;
}

Eigen::MatrixXd gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed, double shift, double scale) {
  auto rng = stream_engine(seed, 1);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = shift + scale * z(rng);
  return m;
}

FeatureMatrix to_features(const Eigen::MatrixXd& rows, const std::string& id_prefix, const std::string& feature) {
  std::vector<std::string> ids;
  std::vector<float> data;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    ids.push_back(id_for(id_prefix, static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < rows.cols(); ++j) data.push_back(static_cast<float>(rows(i, j)));
  }
  return FeatureMatrix(std::move(ids), static_cast<std::size_t>(rows.cols()), std::move(data), feature);
}

PredictionCube random_cube(const std::string& condition, std::size_t seeds, std::size_t images,
                           double accuracy, std::uint64_t seed, bool planes) {
  auto rng = stream_engine(seed, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PredictionCube cube;
  cube.condition = condition;
  for (std::size_t s = 0; s < seeds; ++s) cube.seeds.push_back(static_cast<std::int64_t>(s));
  for (std::size_t i = 0; i < images; ++i) {
    cube.image_ids.push_back(id_for("test", i));
    cube.true_class.push_back(kAllClasses[i % kNumClasses]);
  }
  if (planes) {
    cube.true_plane.emplace();
    cube.pred_plane.emplace();
    for (std::size_t i = 0; i < images; ++i) cube.true_plane->push_back(kAllPlanes[(i / 4) % kNumPlanes]);
  }
  for (std::size_t s = 0; s < seeds; ++s) {
    for (std::size_t i = 0; i < images; ++i) {
      const auto t = static_cast<std::size_t>(cube.true_class[i]);
      const std::size_t c = u(rng) < accuracy ? t : (t + 1 + uniform_index(rng, kNumClasses - 1)) % kNumClasses;
      cube.pred_class.push_back(kAllClasses[c]);
      if (planes) {
        const auto tp = static_cast<std::size_t>((*cube.true_plane)[i]);
        const std::size_t p = u(rng) < accuracy ? tp : (tp + 1 + uniform_index(rng, kNumPlanes - 1)) % kNumPlanes;
        cube.pred_plane->push_back(kAllPlanes[p]);
      }
    }
  }
  return cube;
}

GrayImage noise_image(std::uint64_t seed, std::size_t w, std::size_t h) {
  auto rng = stream_engine(seed, 9);
  GrayImage img(w, h);
  for (auto& v : img.pixels) v = static_cast<std::uint8_t>(uniform_index(rng, 256));
  return img;
}

AuditPlant write_audit_plant(const fs::path& root) {
  for (std::size_t i = 0; i < 8; ++i)
    write_png(synthetic_slice(500 + i), root / "train" / ("t" + std::to_string(i) + ".png"));
  for (std::size_t i = 0; i < 6; ++i)
    write_png(noise_image(700 + i, 80, 80), root / "test" / ("q" + std::to_string(i) + ".png"));

  fs::copy_file(root / "train/t0.png", root / "test/copy_of_t0.png");
  write_file_bytes(root / "test/reenc_t1.png", encode_png(read_png(root / "train/t1.png"), 9));
  write_png(noise_image(900, 80, 80), root / "test/t2.png");
  auto near = read_png(root / "train/t3.png");
  for (std::size_t i = 0; i < 20; ++i) near.pixels[i * 97] = static_cast<std::uint8_t>(near.pixels[i * 97] ^ 1);
  write_png(near, root / "test/near_t3.png");
  const auto t4 = read_png(root / "train/t4.png");
  GrayImage flat(t4.width * 2, t4.height / 2);
  flat.pixels = t4.pixels;
  write_png(flat, root / "test/reshaped_t4.png");

  auto rec = [](std::string id, fs::path path, Split split, TumourClass c = TumourClass::meningioma,
                Plane p = Plane::axial) { return ImageRecord{std::move(id), std::move(path), split, Source::real, c, p}; };
  std::vector<ImageRecord> tr, te;
  for (std::size_t i = 0; i < 8; ++i)
    tr.push_back(rec("t" + std::to_string(i), "train/t" + std::to_string(i) + ".png", Split::train,
                     i == 1 ? TumourClass::pituitary : TumourClass::meningioma, i == 0 ? Plane::coronal : Plane::axial));
  tr.push_back(rec("t_shared", "test/q5.png", Split::train));
  for (std::size_t i = 0; i < 6; ++i)
    te.push_back(rec("q" + std::to_string(i), "test/q" + std::to_string(i) + ".png", Split::test));
  te.push_back(rec("c0", "test/copy_of_t0.png", Split::test));
  te.push_back(rec("c1", "test/reenc_t1.png", Split::test));
  te.push_back(rec("c2", "test/t2.png", Split::test));
  te.push_back(rec("c3", "test/near_t3.png", Split::test));
  te.push_back(rec("c4", "test/reshaped_t4.png", Split::test));
  return {Manifest(std::move(tr)), Manifest(std::move(te))};
}

}  // namespace synthqa::fx
