#include "synthqa/training_history.hpp"

#include <json.hpp>

#include "synthqa/error.hpp"
#include "text_util.hpp"

namespace synthqa {

std::size_t select_min_val_loss(const std::vector<HistoryEntry>& entries) {
  if (entries.empty()) throw DataError("training history has no entries");
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].val_loss < entries[best].val_loss) best = i;
  return best;
}

TrainingHistory parse_training_history(std::string_view text, const std::string& source) {
  TrainingHistory history;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    HistoryEntry e;
    try {
      e.step = j.at("step").get<std::int64_t>();
      e.val_loss = j.at("val_loss").get<double>();
      e.val_tumour_acc = j.at("val_tumour_acc").get<double>();
      e.real_in_batch = j.at("real_in_batch").get<std::int64_t>();
      e.batch_size = j.at("batch_size").get<std::int64_t>();
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(source, line_no, std::string("missing or invalid field: ") + ex.what());
    }
    if (j.contains("model")) history.model = j["model"].get<std::string>();
    if (j.contains("condition")) history.condition = j["condition"].get<std::string>();
    if (j.contains("seed")) history.seed = j["seed"].get<std::int64_t>();
    history.entries.push_back(e);
  }
  history.selected_index = select_min_val_loss(history.entries);
  return history;
}

TrainingHistory load_training_history(const std::filesystem::path& path) {
  return parse_training_history(detail::read_text_file(path), path.string());
}

std::string format_training_history(const TrainingHistory& history) {
  std::string out;
  for (const auto& e : history.entries) {
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["val_loss"] = e.val_loss;
    j["val_tumour_acc"] = e.val_tumour_acc;
    j["real_in_batch"] = e.real_in_batch;
    j["batch_size"] = e.batch_size;
    if (!history.model.empty()) j["model"] = history.model;
    if (!history.condition.empty()) j["condition"] = history.condition;
    j["seed"] = history.seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace synthqa
