#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace synthqa {

struct HistoryEntry {
  std::int64_t step = 0;  // optimizer step or epoch count completed at this record
  double val_loss = 0.0;
  double val_tumour_acc = 0.0;
  std::int64_t real_in_batch = 0;
  std::int64_t batch_size = 0;
};

struct TrainingHistory {
  std::string model;
  std::string condition;
  std::int64_t seed = 0;
  std::vector<HistoryEntry> entries;
  std::size_t selected_index = 0;
};

// Entry with minimum validation loss; earliest on ties.
std::size_t select_min_val_loss(const std::vector<HistoryEntry>& entries);

// One JSON object per line with keys step, val_loss, val_tumour_acc,
// real_in_batch, batch_size. Optional model/condition/seed keys on any record
// fill the history metadata. Throws DataError on missing fields.
TrainingHistory parse_training_history(std::string_view text, const std::string& source = "<history>");
TrainingHistory load_training_history(const std::filesystem::path& path);

std::string format_training_history(const TrainingHistory& history);

}  // namespace synthqa
