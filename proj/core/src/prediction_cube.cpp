#include "synthqa/prediction_cube.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "synthqa/error.hpp"
#include "text_util.hpp"

namespace synthqa {

std::size_t PredictionCube::seed_index(std::int64_t seed) const {
  auto it = std::find(seeds.begin(), seeds.end(), seed);
  if (it == seeds.end()) {
    throw ValidationError("seed " + std::to_string(seed) + " not present in cube '" + condition +
                          "'");
  }
  return static_cast<std::size_t>(it - seeds.begin());
}

void PredictionCube::validate() const {
  const std::size_t cells = seeds.size() * image_ids.size();
  if (true_class.size() != image_ids.size()) throw DataError("cube '" + condition + "': true_class size mismatch");
  if (pred_class.size() != cells) throw DataError("cube '" + condition + "': pred_class size mismatch");
  if (true_plane && true_plane->size() != image_ids.size())
    throw DataError("cube '" + condition + "': true_plane size mismatch");
  if (pred_plane && pred_plane->size() != cells)
    throw DataError("cube '" + condition + "': pred_plane size mismatch");
  if (!std::is_sorted(seeds.begin(), seeds.end()) ||
      std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end())
    throw DataError("cube '" + condition + "': seeds must be unique and ascending");
  if (!std::is_sorted(image_ids.begin(), image_ids.end()) ||
      std::adjacent_find(image_ids.begin(), image_ids.end()) != image_ids.end())
    throw DataError("cube '" + condition + "': image ids must be unique and ascending");
}

void require_paired(const PredictionCube& a, const PredictionCube& b) {
  if (a.seeds != b.seeds) {
    throw ValidationError("cubes '" + a.condition + "' and '" + b.condition +
                          "' have different seeds");
  }
  if (a.image_ids != b.image_ids) {
    throw ValidationError("cubes '" + a.condition + "' and '" + b.condition +
                          "' have different image ids");
  }
  if (a.true_class != b.true_class) {
    throw ValidationError("cubes '" + a.condition + "' and '" + b.condition +
                          "' disagree on true classes");
  }
}

namespace {

struct Cell {
  TumourClass pred_class;
  std::optional<Plane> pred_plane;
};

struct Builder {
  std::set<std::int64_t> seeds;
  std::map<std::string, std::pair<TumourClass, std::optional<Plane>>> truth;
  std::map<std::pair<std::int64_t, std::string>, Cell> cells;
  std::optional<bool> planes;
};

}  // namespace

std::map<std::string, PredictionCube> parse_prediction_cubes(std::string_view text,
                                                             const std::string& source) {
  auto lines = detail::split_lines(text, source);
  if (lines.empty() || lines.front() != kCubeHeader) {
    throw ParseError(source, 1, "expected header '" + std::string(kCubeHeader) + "'");
  }
  std::map<std::string, Builder> builders;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto f = detail::split_fields(lines[i]);
    if (f.size() != 7) throw ParseError(source, line_no, "expected 7 fields");
    auto& b = builders[std::string(f[0])];
    std::int64_t seed = 0;
    auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), seed);
    if (ec != std::errc() || ptr != f[1].data() + f[1].size())
      throw ParseError(source, line_no, "bad seed '" + std::string(f[1]) + "'");
    const std::string image(f[2]);
    if (image.empty()) throw ParseError(source, line_no, "empty image_id");
    auto tc = parse_class(f[3]);
    auto pc = parse_class(f[4]);
    if (!tc || !pc) throw ParseError(source, line_no, "unknown class value");
    const bool has_plane = !f[5].empty() || !f[6].empty();
    if (b.planes && *b.planes != has_plane)
      throw ParseError(source, line_no, "plane columns must be all present or all empty");
    b.planes = has_plane;
    std::optional<Plane> tp, pp;
    if (has_plane) {
      tp = parse_plane(f[5]);
      pp = parse_plane(f[6]);
      if (!tp || !pp) throw ParseError(source, line_no, "unknown plane value");
    }
    auto [it, inserted] = b.truth.emplace(image, std::make_pair(*tc, tp));
    if (!inserted && it->second != std::make_pair(*tc, tp))
      throw ParseError(source, line_no, "inconsistent ground truth for image '" + image + "'");
    if (!b.cells.emplace(std::make_pair(seed, image), Cell{*pc, pp}).second)
      throw ParseError(source, line_no, "duplicate (seed, image) cell");
    b.seeds.insert(seed);
  }

  std::map<std::string, PredictionCube> cubes;
  for (auto& [condition, b] : builders) {
    PredictionCube cube;
    cube.condition = condition;
    cube.seeds.assign(b.seeds.begin(), b.seeds.end());
    const bool planes = b.planes.value_or(false);
    if (planes) {
      cube.true_plane.emplace();
      cube.pred_plane.emplace();
    }
    for (const auto& [image, truth] : b.truth) {
      cube.image_ids.push_back(image);
      cube.true_class.push_back(truth.first);
      if (planes) cube.true_plane->push_back(*truth.second);
    }
    for (auto seed : cube.seeds) {
      for (const auto& image : cube.image_ids) {
        auto it = b.cells.find({seed, image});
        if (it == b.cells.end()) {
          throw DataError(source + ": cube '" + condition + "' missing cell (seed " +
                          std::to_string(seed) + ", image " + image + ")");
        }
        cube.pred_class.push_back(it->second.pred_class);
        if (planes) cube.pred_plane->push_back(*it->second.pred_plane);
      }
    }
    cube.validate();
    cubes.emplace(condition, std::move(cube));
  }
  return cubes;
}

std::map<std::string, PredictionCube> load_prediction_cubes(const std::filesystem::path& path) {
  return parse_prediction_cubes(detail::read_text_file(path), path.string());
}

std::string format_prediction_cube(const PredictionCube& cube, bool with_header) {
  cube.validate();
  std::string out;
  if (with_header) {
    out += kCubeHeader;
    out += '\n';
  }
  for (std::size_t s = 0; s < cube.num_seeds(); ++s) {
    for (std::size_t i = 0; i < cube.num_images(); ++i) {
      out += cube.condition + ',' + std::to_string(cube.seeds[s]) + ',' + cube.image_ids[i] + ',';
      out += to_string(cube.true_class[i]);
      out += ',';
      out += to_string(cube.predicted_class(s, i));
      out += ',';
      if (cube.has_planes()) {
        out += to_string((*cube.true_plane)[i]);
        out += ',';
        out += to_string(cube.predicted_plane(s, i));
      } else {
        out += ',';
      }
      out += '\n';
    }
  }
  return out;
}

void write_prediction_cubes(const std::vector<PredictionCube>& cubes,
                            const std::filesystem::path& path) {
  std::string text(kCubeHeader);
  text += '\n';
  for (const auto& c : cubes) text += format_prediction_cube(c, false);
  detail::write_text_file(path, text);
}

}  // namespace synthqa
