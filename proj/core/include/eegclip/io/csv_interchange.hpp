#pragma once

// CSV interchange for bringing external recordings in: one file per trial,
// a header row of channel names, then one row per sample. An index CSV with
// columns file,subject,session,trial,label,fs ties the trial files together.

#include <filesystem>
#include <string>
#include <vector>

#include "eegclip/io/recording.hpp"

namespace eegclip::io {

struct CsvTrial {
  std::vector<std::string> channel_names;
  Trial trial;
};

void write_csv_trial(const std::filesystem::path& path, const Trial& trial,
                     const std::vector<std::string>& channel_names);

/// Reads sample data only; ids, label and fs come from `meta`.
CsvTrial read_csv_trial(const std::filesystem::path& path, const Trial& meta);

/// Builds a RecordingSet from an index CSV. Labels appear in label_set in
/// order of first appearance.
RecordingSet load_csv_index(const std::filesystem::path& index_path,
                            const ValidationOptions& opts = {});

}  // namespace eegclip::io
