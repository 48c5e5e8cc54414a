#include "eegclip/featurize/feature_cache.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "eegclip/binary_io.hpp"
#include "eegclip/error.hpp"

namespace eegclip::feat {

using nlohmann::json;

std::string serialize_features(const FeatureSet& features) {
  json header;
  header["schema_version"] = kFeatureSchemaVersion;
  header["featurize"] = features.config;
  header["channel_names"] = features.channel_names;
  header["label_set"] = features.label_set;
  header["cells"] = features.cells;
  json items = json::array();
  for (const auto& it : features.items) {
    items.push_back({{"label", it.label},
                     {"label_index", it.label_index},
                     {"subject", it.subject_id},
                     {"session", it.session_id},
                     {"trial", it.trial_id},
                     {"block", it.block},
                     {"frames", it.frames},
                     {"bands", it.bands},
                     {"channels", it.channels}});
  }
  header["items"] = std::move(items);
  std::ostringstream out(std::ios::binary);
  binary::write_header(out, kFeatureMagic, kFeatureSchemaVersion, header);
  for (const auto& it : features.items) {
    binary::write_array<double>(out, it.de);
    binary::write_array<double>(out, it.psd);
  }
  return std::move(out).str();
}

FeatureSet parse_features(std::string_view bytes) {
  std::istringstream in{std::string(bytes), std::ios::binary};
  auto header = binary::read_header(in, kFeatureMagic, "feature cache");
  if (header.version != kFeatureSchemaVersion) {
    throw Error(ErrorCode::kMalformedHeader, "feature cache: unsupported schema version");
  }
  FeatureSet fs;
  try {
    const json& h = header.json;
    from_json(h.at("featurize"), fs.config);
    fs.channel_names = h.at("channel_names").get<std::vector<std::string>>();
    fs.label_set = h.at("label_set").get<std::vector<std::string>>();
    fs.cells = h.at("cells").get<std::vector<std::size_t>>();
    for (const auto& e : h.at("items")) {
      FramedFeatures it;
      it.label = e.at("label").get<std::string>();
      it.label_index = e.at("label_index").get<std::size_t>();
      it.subject_id = e.at("subject").get<std::uint32_t>();
      it.session_id = e.at("session").get<std::uint32_t>();
      it.trial_id = e.at("trial").get<std::uint32_t>();
      it.block = e.at("block").get<std::size_t>();
      it.frames = e.at("frames").get<std::size_t>();
      it.bands = e.at("bands").get<std::size_t>();
      it.channels = e.at("channels").get<std::size_t>();
      it.de.resize(it.frames * it.bands * it.channels);
      it.psd.resize(it.de.size());
      if (!binary::read_array<double>(in, it.de) || !binary::read_array<double>(in, it.psd)) {
        throw Error(ErrorCode::kTruncatedPayload, "feature cache: payload truncated");
      }
      fs.items.push_back(std::move(it));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, std::string("feature cache: ") + e.what());
  }
  return fs;
}

void save_features(const FeatureSet& features, const std::filesystem::path& path) {
  binary::write_file(path, serialize_features(features));
}

FeatureSet load_features(const std::filesystem::path& path) { return parse_features(binary::read_file(path)); }

}  // namespace eegclip::feat
