#include "eegclip/io/csv_interchange.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eegclip/error.hpp"

namespace eegclip::io {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = cell.find_first_not_of(' ');
    out.push_back(start == std::string::npos ? std::string() : cell.substr(start));
  }
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::kMalformedHeader, where + ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

void write_csv_trial(const std::filesystem::path& path, const Trial& trial,
                     const std::vector<std::string>& channel_names) {
  if (channel_names.size() != trial.channels) {
    throw Error(ErrorCode::kShapeMismatch, "write_csv_trial: channel name count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  for (std::size_t c = 0; c < channel_names.size(); ++c) {
    out << (c ? "," : "") << channel_names[c];
  }
  out << '\n';
  char buf[32];
  for (std::size_t n = 0; n < trial.samples; ++n) {
    for (std::size_t c = 0; c < trial.channels; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(trial.data[c * trial.samples + n]));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

CsvTrial read_csv_trial(const std::filesystem::path& path, const Trial& meta) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path.string());
  CsvTrial result;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": missing channel header row");
  }
  result.channel_names = split_row(line);
  const std::size_t channels = result.channel_names.size();
  std::vector<std::vector<float>> columns(channels);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = split_row(line);
    const std::string where = path.string() + ":" + std::to_string(row);
    if (cells.size() != channels) {
      throw Error(ErrorCode::kShapeMismatch, where + ": expected " + std::to_string(channels) + " columns");
    }
    for (std::size_t c = 0; c < channels; ++c) {
      columns[c].push_back(static_cast<float>(parse_number(cells[c], where)));
    }
  }
  Trial t = meta;
  t.channels = channels;
  t.samples = channels ? columns[0].size() : 0;
  t.data.clear();
  t.data.reserve(channels * t.samples);
  for (const auto& col : columns) t.data.insert(t.data.end(), col.begin(), col.end());
  result.trial = std::move(t);
  return result;
}

RecordingSet load_csv_index(const std::filesystem::path& index_path, const ValidationOptions& opts) {
  std::ifstream in(index_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + index_path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedHeader, "empty index file");
  const auto header = split_row(line);
  const std::vector<std::string> expected = {"file", "subject", "session", "trial", "label", "fs"};
  if (header != expected) {
    throw Error(ErrorCode::kMalformedHeader,
                index_path.string() + ": header must be file,subject,session,trial,label,fs");
  }
  RecordingSet set;
  set.meta = "csv import " + index_path.filename().string();
  const auto base = index_path.parent_path();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    const std::string where = index_path.string() + ":" + std::to_string(row);
    if (cells.size() != expected.size()) throw Error(ErrorCode::kMalformedHeader, where + ": wrong column count");
    Trial meta;
    meta.subject_id = static_cast<std::uint32_t>(parse_number(cells[1], where));
    meta.session_id = static_cast<std::uint32_t>(parse_number(cells[2], where));
    meta.trial_id = static_cast<std::uint32_t>(parse_number(cells[3], where));
    meta.label = cells[4];
    meta.fs = parse_number(cells[5], where);
    auto loaded = read_csv_trial(base / cells[0], meta);
    if (set.channel_names.empty()) {
      set.channel_names = loaded.channel_names;
    } else if (set.channel_names != loaded.channel_names) {
      throw Error(ErrorCode::kShapeMismatch, where + ": channel header differs from first trial");
    }
    if (std::find(set.label_set.begin(), set.label_set.end(), meta.label) == set.label_set.end()) {
      set.label_set.push_back(meta.label);
    }
    set.trials.push_back(std::move(loaded.trial));
  }
  validate(set, opts);
  return set;
}

}  // namespace eegclip::io
