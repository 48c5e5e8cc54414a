#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eegclip::feat {

struct Placement {
  std::string channel;
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const Placement&) const = default;
};

/// Electrode-to-grid map. Text form: one "NAME row col" line per channel;
/// '#' starts a comment, and a "# grid: R C" comment sets the grid size
/// (9 x 9 when absent).
struct ElectrodeLayout {
  std::size_t rows = 9;
  std::size_t cols = 9;
  std::vector<Placement> placements;

  /// 62-channel 10-20 arrangement on a 9 x 9 grid.
  static ElectrodeLayout seed62();
  static ElectrodeLayout parse(std::string_view text);
  static ElectrodeLayout load(const std::filesystem::path& path);
  std::string to_text() const;

  /// Placements inside the grid, unique cells, unique names.
  void validate() const;

  /// Flat cell index (row * cols + col) for each named channel, in the order
  /// given. Throws when a channel has no placement or counts differ.
  std::vector<std::size_t> cells_for(const std::vector<std::string>& channel_names) const;

  bool operator==(const ElectrodeLayout&) const = default;
};

}  // namespace eegclip::feat
