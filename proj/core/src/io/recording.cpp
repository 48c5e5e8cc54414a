#include "eegclip/io/recording.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "eegclip/binary_io.hpp"
#include "eegclip/error.hpp"

namespace eegclip::io {

using nlohmann::json;

std::string Trial::describe() const {
  std::ostringstream os;
  os << "trial (subject " << subject_id << ", session " << session_id << ", trial " << trial_id
     << ")";
  return os.str();
}

std::size_t RecordingSet::label_index(std::string_view label) const {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  if (it == label_set.end()) {
    throw Error(ErrorCode::kUnknownLabel, "unknown label '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - label_set.begin());
}

std::vector<std::string> seed_channel_names() {
  return {"FP1", "FPZ", "FP2", "AF3", "AF4", "F7",  "F5",  "F3",  "F1",  "FZ",  "F2",
          "F4",  "F6",  "F8",  "FT7", "FC5", "FC3", "FC1", "FCZ", "FC2", "FC4", "FC6",
          "FT8", "T7",  "C5",  "C3",  "C1",  "CZ",  "C2",  "C4",  "C6",  "T8",  "TP7",
          "CP5", "CP3", "CP1", "CPZ", "CP2", "CP4", "CP6", "TP8", "P7",  "P5",  "P3",
          "P1",  "PZ",  "P2",  "P4",  "P6",  "P8",  "PO7", "PO5", "PO3", "POZ", "PO4",
          "PO6", "PO8", "CB1", "O1",  "OZ",  "O2",  "CB2"};
}

void validate(const RecordingSet& set, const ValidationOptions& opts) {
  if (opts.expected_channels != 0 && set.channel_names.size() != opts.expected_channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "recording declares " + std::to_string(set.channel_names.size()) +
                    " channel names, expected " + std::to_string(opts.expected_channels));
  }
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> seen;
  for (const auto& t : set.trials) {
    if (t.subject_id == 0 || t.session_id == 0 || t.trial_id == 0) {
      throw Error(ErrorCode::kInvalidArgument, t.describe() + ": ids must be positive");
    }
    if (std::find(set.label_set.begin(), set.label_set.end(), t.label) == set.label_set.end()) {
      throw Error(ErrorCode::kUnknownLabel, t.describe() + ": unknown label '" + t.label + "'");
    }
    if (t.channels != set.channel_names.size()) {
      throw Error(ErrorCode::kShapeMismatch, t.describe() + ": has " + std::to_string(t.channels) +
                                                 " channels, recording declares " +
                                                 std::to_string(set.channel_names.size()));
    }
    if (t.data.size() != t.channels * t.samples) {
      throw Error(ErrorCode::kShapeMismatch, t.describe() + ": data size does not match shape");
    }
    if (!(t.fs >= 2.0 * opts.band_ceiling_hz)) {
      throw Error(ErrorCode::kBelowNyquist,
                  t.describe() + ": sampling rate below Nyquist for configured bands (fs = " +
                      std::to_string(t.fs) + " Hz)");
    }
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      if (!std::isfinite(t.data[i])) {
        throw Error(ErrorCode::kNonFiniteSample,
                    t.describe() + ": non-finite sample at channel " +
                        std::to_string(i / std::max<std::size_t>(t.samples, 1)) + ", index " +
                        std::to_string(i % std::max<std::size_t>(t.samples, 1)));
      }
    }
    if (!seen.emplace(t.subject_id, t.session_id, t.trial_id).second) {
      throw Error(ErrorCode::kDuplicateTrial, t.describe() + ": duplicate id triple");
    }
  }
}

std::string serialize_recording(const RecordingSet& set) {
  json header;
  header["schema_version"] = kRecordingSchemaVersion;
  header["label_set"] = set.label_set;
  header["channel_names"] = set.channel_names;
  header["meta"] = set.meta;
  json trials = json::array();
  for (const auto& t : set.trials) {
    trials.push_back({{"subject", t.subject_id},
                      {"session", t.session_id},
                      {"trial", t.trial_id},
                      {"label", t.label},
                      {"channels", t.channels},
                      {"samples", t.samples},
                      {"fs", t.fs}});
  }
  header["trials"] = std::move(trials);

  std::ostringstream out(std::ios::binary);
  binary::write_header(out, kRecordingMagic, kRecordingSchemaVersion, header);
  for (const auto& t : set.trials) {
    binary::write_array<float>(out, t.data);
  }
  return std::move(out).str();
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kMalformedHeader, where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, where + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace

RecordingSet parse_recording(std::string_view bytes, const ValidationOptions& opts) {
  std::istringstream in{std::string(bytes), std::ios::binary};
  auto header = binary::read_header(in, kRecordingMagic, "recording");
  if (header.version != kRecordingSchemaVersion) {
    throw Error(ErrorCode::kMalformedHeader,
                "recording: unsupported schema version " + std::to_string(header.version));
  }
  const json& h = header.json;
  RecordingSet set;
  set.label_set = field<std::vector<std::string>>(h, "label_set", "recording header");
  set.channel_names = field<std::vector<std::string>>(h, "channel_names", "recording header");
  set.meta = field<std::string>(h, "meta", "recording header");
  const auto trials = field<json>(h, "trials", "recording header");
  if (!trials.is_array()) throw Error(ErrorCode::kMalformedHeader, "recording: trials is not a list");

  for (std::size_t i = 0; i < trials.size(); ++i) {
    const std::string where = "recording trial entry " + std::to_string(i);
    Trial t;
    t.subject_id = field<std::uint32_t>(trials[i], "subject", where);
    t.session_id = field<std::uint32_t>(trials[i], "session", where);
    t.trial_id = field<std::uint32_t>(trials[i], "trial", where);
    t.label = field<std::string>(trials[i], "label", where);
    t.channels = field<std::size_t>(trials[i], "channels", where);
    t.samples = field<std::size_t>(trials[i], "samples", where);
    t.fs = field<double>(trials[i], "fs", where);
    t.data.resize(t.channels * t.samples);
    if (!binary::read_array<float>(in, t.data)) {
      throw Error(ErrorCode::kTruncatedPayload, t.describe() + ": payload truncated");
    }
    set.trials.push_back(std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kMalformedHeader, "recording: trailing bytes after last payload");
  }
  validate(set, opts);
  return set;
}

void save_recording(const RecordingSet& set, const std::filesystem::path& path) {
  binary::write_file(path, serialize_recording(set));
}

RecordingSet load_recording(const std::filesystem::path& path, const ValidationOptions& opts) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "recording not found: " + path.string());
  }
  return parse_recording(binary::read_file(path), opts);
}

}  // namespace eegclip::io
