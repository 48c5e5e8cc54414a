#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "eegclip/featurize/featurize.hpp"

namespace eegclip::feat {

inline constexpr std::string_view kFeatureMagic = "EEGF";
inline constexpr std::uint32_t kFeatureSchemaVersion = 1;

/// Same framing as the recording container; payload is f64 DE then f64 PSD
/// (T x F x C each) per item, in header order.
std::string serialize_features(const FeatureSet& features);
FeatureSet parse_features(std::string_view bytes);

void save_features(const FeatureSet& features, const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path);

}  // namespace eegclip::feat
