#include "eegclip/featurize/layout.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>

#include "eegclip/error.hpp"

namespace eegclip::feat {

ElectrodeLayout ElectrodeLayout::seed62() {
  ElectrodeLayout layout;
  auto row = [&](std::size_t r, std::initializer_list<std::pair<const char*, std::size_t>> cells) {
    for (const auto& [name, c] : cells) layout.placements.push_back({name, r, c});
  };
  row(0, {{"FP1", 3}, {"FPZ", 4}, {"FP2", 5}});
  row(1, {{"AF3", 3}, {"AF4", 5}});
  row(2, {{"F7", 0}, {"F5", 1}, {"F3", 2}, {"F1", 3}, {"FZ", 4}, {"F2", 5}, {"F4", 6}, {"F6", 7}, {"F8", 8}});
  row(3, {{"FT7", 0}, {"FC5", 1}, {"FC3", 2}, {"FC1", 3}, {"FCZ", 4}, {"FC2", 5}, {"FC4", 6}, {"FC6", 7}, {"FT8", 8}});
  row(4, {{"T7", 0}, {"C5", 1}, {"C3", 2}, {"C1", 3}, {"CZ", 4}, {"C2", 5}, {"C4", 6}, {"C6", 7}, {"T8", 8}});
  row(5, {{"TP7", 0}, {"CP5", 1}, {"CP3", 2}, {"CP1", 3}, {"CPZ", 4}, {"CP2", 5}, {"CP4", 6}, {"CP6", 7}, {"TP8", 8}});
  row(6, {{"P7", 0}, {"P5", 1}, {"P3", 2}, {"P1", 3}, {"PZ", 4}, {"P2", 5}, {"P4", 6}, {"P6", 7}, {"P8", 8}});
  row(7, {{"PO7", 1}, {"PO5", 2}, {"PO3", 3}, {"POZ", 4}, {"PO4", 5}, {"PO6", 6}, {"PO8", 7}});
  row(8, {{"CB1", 1}, {"O1", 3}, {"OZ", 4}, {"O2", 5}, {"CB2", 7}});
  return layout;
}

ElectrodeLayout ElectrodeLayout::parse(std::string_view text) {
  ElectrodeLayout layout;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      std::istringstream comment(line.substr(hash + 1));
      std::string key;
      if (comment >> key && key == "grid:") {
        if (!(comment >> layout.rows >> layout.cols)) {
          throw Error(ErrorCode::kMalformedHeader, "layout line " + std::to_string(lineno) + ": bad grid directive");
        }
      }
      line.resize(hash);
    }
    std::istringstream ss(line);
    Placement p;
    if (!(ss >> p.channel)) continue;
    if (!(ss >> p.row >> p.col)) {
      throw Error(ErrorCode::kMalformedHeader,
                  "layout line " + std::to_string(lineno) + ": expected NAME row col");
    }
    layout.placements.push_back(std::move(p));
  }
  layout.validate();
  return layout;
}

ElectrodeLayout ElectrodeLayout::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open layout file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

std::string ElectrodeLayout::to_text() const {
  std::ostringstream os;
  os << "# grid: " << rows << ' ' << cols << '\n';
  for (const auto& p : placements) os << p.channel << ' ' << p.row << ' ' << p.col << '\n';
  return os.str();
}

void ElectrodeLayout::validate() const {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::kInvalidConfig, "layout: empty grid");
  std::set<std::pair<std::size_t, std::size_t>> cells;
  std::set<std::string> names;
  for (const auto& p : placements) {
    if (p.row >= rows || p.col >= cols) {
      throw Error(ErrorCode::kInvalidConfig, "layout: channel " + p.channel + " placed outside the grid");
    }
    if (!cells.emplace(p.row, p.col).second) {
      throw Error(ErrorCode::kInvalidConfig, "layout: duplicate placement at (" + std::to_string(p.row) +
                                                 ", " + std::to_string(p.col) + ") for " + p.channel);
    }
    if (!names.insert(p.channel).second) {
      throw Error(ErrorCode::kInvalidConfig, "layout: channel " + p.channel + " placed twice");
    }
  }
}

std::vector<std::size_t> ElectrodeLayout::cells_for(const std::vector<std::string>& channel_names) const {
  validate();
  if (channel_names.size() != placements.size()) {
    throw Error(ErrorCode::kShapeMismatch, "layout has " + std::to_string(placements.size()) +
                                               " placements but data has " +
                                               std::to_string(channel_names.size()) + " channels");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& p : placements) index[p.channel] = p.row * cols + p.col;
  std::vector<std::size_t> cells;
  cells.reserve(channel_names.size());
  for (const auto& name : channel_names) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(ErrorCode::kInvalidConfig, "layout: channel " + name + " has no placement");
    }
    cells.push_back(it->second);
  }
  return cells;
}

}  // namespace eegclip::feat
