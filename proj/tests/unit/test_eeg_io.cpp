#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <limits>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "eegclip/bands.hpp"
#include "eegclip/binary_io.hpp"
#include "eegclip/error.hpp"
#include "eegclip/io/csv_interchange.hpp"
#include "eegclip/io/recording.hpp"
#include "eegclip/io/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace eegclip;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("eegclip_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode parse_error_code(const std::string& bytes) {
  try {
    io::parse_recording(bytes, oracle::any_channels());
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse succeeded";
  return ErrorCode::kIo;
}

std::string rewrite_header(const std::string& bytes, const std::function<void(nlohmann::json&)>& edit) {
  std::istringstream in(bytes);
  auto header = binary::read_header(in, io::kRecordingMagic, "recording");
  std::string payload(std::istreambuf_iterator<char>(in), {});
  edit(header.json);
  std::ostringstream out;
  binary::write_header(out, io::kRecordingMagic, header.version, header.json);
  return out.str() + payload;
}

}  // namespace

TEST(SaveLoad, RoundTripIsFieldForFieldEqual) {
  const auto set = oracle::small_recording(2, 2, 3);
  const auto path = temp_dir("roundtrip") / "r.eegc";
  io::save_recording(set, path);
  EXPECT_EQ(io::load_recording(path, oracle::any_channels()), set);
}

TEST(SaveLoad, RoundTripOverRandomFixtures) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto set = oracle::small_recording(1 + seed % 3, 1 + seed % 2, 1 + seed % 4, 1 + seed % 5,
                                             200 + 37 * seed, 200.0 + 10.0 * static_cast<double>(seed), seed);
    EXPECT_EQ(io::parse_recording(io::serialize_recording(set), oracle::any_channels()), set) << seed;
  }
}

TEST(SaveLoad, SameSetTwiceGivesIdenticalBytes) {
  const auto set = oracle::small_recording(2, 1, 3);
  const auto dir = temp_dir("twice");
  io::save_recording(set, dir / "a.eegc");
  io::save_recording(set, dir / "b.eegc");
  EXPECT_EQ(binary::read_file(dir / "a.eegc"), binary::read_file(dir / "b.eegc"));
}

TEST(SaveLoad, EmptyTrialCollectionIsAValidFile) {
  auto set = oracle::small_recording(0, 0, 0);
  const auto bytes = io::serialize_recording(set);
  const auto back = io::parse_recording(bytes, oracle::any_channels());
  EXPECT_TRUE(back.trials.empty());
  EXPECT_EQ(back, set);
}

TEST(SaveLoad, TwoSubjectsThreeTrialsGivesSixUniqueTriples) {
  const auto set = oracle::small_recording(2, 1, 3);
  const auto back = io::parse_recording(io::serialize_recording(set), oracle::any_channels());
  ASSERT_EQ(back.trials.size(), 6u);
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> ids;
  for (const auto& t : back.trials) ids.insert({t.subject_id, t.session_id, t.trial_id});
  EXPECT_EQ(ids.size(), 6u);
}

TEST(SaveLoad, UnwritablePathFails) {
  const auto set = oracle::small_recording(1, 1, 1);
  EXPECT_THROW(io::save_recording(set, "/nonexistent_dir_eegclip/x.eegc"), Error);
}

TEST(Validation, SamplingRateBelowNyquistIsRejected) {
  auto set = oracle::small_recording(1, 1, 2, 4, 400, 100.0);
  try {
    io::parse_recording(io::serialize_recording(set), oracle::any_channels());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBelowNyquist);
    EXPECT_NE(std::string(e.what()).find("sampling rate below Nyquist for configured bands"), std::string::npos);
  }
}

TEST(Validation, DistinctErrorsNameTheTrial) {
  const auto set = oracle::small_recording(1, 1, 3);
  const auto good = io::serialize_recording(set);

  EXPECT_EQ(parse_error_code("XXXX" + good.substr(4)), ErrorCode::kMalformedHeader);
  EXPECT_EQ(parse_error_code(good.substr(0, good.size() - 10)), ErrorCode::kTruncatedPayload);
  EXPECT_EQ(parse_error_code(good.substr(0, 10)), ErrorCode::kMalformedHeader);  // cut inside the header

  auto bad_label = rewrite_header(good, [](nlohmann::json& j) { j["trials"][1]["label"] = "joy"; });
  EXPECT_EQ(parse_error_code(bad_label), ErrorCode::kUnknownLabel);

  auto dup = rewrite_header(good, [](nlohmann::json& j) { j["trials"][2]["trial"] = 1; });
  EXPECT_EQ(parse_error_code(dup), ErrorCode::kDuplicateTrial);

  auto nonfinite = set;
  nonfinite.trials[1].data[5] = std::numeric_limits<float>::quiet_NaN();
  try {
    io::parse_recording(io::serialize_recording(nonfinite), oracle::any_channels());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteSample);
    EXPECT_NE(std::string(e.what()).find("trial"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(nonfinite.trials[1].describe()), std::string::npos);
  }
}

TEST(Validation, ChannelCountDefaultsTo62) {
  const auto set = oracle::small_recording(1, 1, 1, 4);
  EXPECT_THROW(io::validate(set), Error);
  EXPECT_NO_THROW(io::validate(set, oracle::any_channels()));
  EXPECT_EQ(io::seed_channel_names().size(), 62u);
}

TEST(Validation, MissingFileIsAnIoError) {
  try {
    io::load_recording("/nonexistent/x.eegc");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Synthetic, SameConfigTwiceIsByteIdentical) {
  io::SynthConfig cfg;
  cfg.trial_seconds = 2.0;
  EXPECT_EQ(io::serialize_recording(io::generate_synthetic(cfg)), io::serialize_recording(io::generate_synthetic(cfg)));
  auto other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_NE(io::serialize_recording(io::generate_synthetic(cfg)), io::serialize_recording(io::generate_synthetic(other)));
}

TEST(Synthetic, BoostOfOneIsRejected) {
  io::SynthConfig cfg;
  cfg.band_signature["positive"].boost = 1.0;
  try {
    cfg.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
}

TEST(Synthetic, InvalidConfigsAreRejected) {
  auto check = [](auto edit) {
    io::SynthConfig cfg;
    edit(cfg);
    EXPECT_THROW(cfg.validate(), Error);
  };
  check([](io::SynthConfig& c) { c.band_signature["neutral"].band_index = 6; });
  check([](io::SynthConfig& c) { c.trial_seconds = 1.0025; });
  check([](io::SynthConfig& c) { c.fs = 100.0; });
  check([](io::SynthConfig& c) { c.n_subjects = 0; });
  check([](io::SynthConfig& c) { c.band_signature.erase("neutral"); });
}

TEST(Synthetic, ShapeAndMetadata) {
  io::SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.n_sessions = 3;
  cfg.trials_per_class = 2;
  cfg.trial_seconds = 1.0;
  const auto set = io::generate_synthetic(cfg);
  EXPECT_EQ(set.trials.size(), 2u * 3u * 3u * 2u);
  EXPECT_NO_THROW(io::validate(set));
  for (const auto& t : set.trials) {
    EXPECT_EQ(t.channels, 62u);
    EXPECT_EQ(t.samples, 200u);
  }
}

// Alpha boost on "positive", measured with a direct DFT rather than the
// library's PSD code.
TEST(Synthetic, SignatureBandCarriesMorePowerByDftOracle) {
  io::SynthConfig cfg;
  cfg.n_subjects = 2;
  cfg.trials_per_class = 2;
  cfg.trial_seconds = 2.0;
  cfg.band_signature = {{"negative", {1, 4.0}}, {"neutral", {3, 4.0}}, {"positive", {2, 4.0}}};
  const auto set = io::generate_synthetic(cfg);
  const auto bands = default_bands();
  std::map<std::string, std::vector<double>> per_label;  // label -> mean band power per band
  std::map<std::string, int> counts;
  for (const auto& t : set.trials) {
    auto& acc = per_label[t.label];
    acc.resize(bands.size(), 0.0);
    for (std::size_t c = 0; c < t.channels; c += 15) {
      const auto ch = t.channel(c);
      std::vector<double> x(ch.begin(), ch.end());
      for (std::size_t b = 0; b < bands.size(); ++b) {
        acc[b] += oracle::dft_band_power(x, t.fs, bands[b].low_hz, bands[b].high_hz);
      }
    }
    ++counts[t.label];
  }
  const std::size_t alpha = 2;
  EXPECT_GT(per_label["positive"][alpha], per_label["negative"][alpha]);
  EXPECT_GT(per_label["positive"][alpha], per_label["neutral"][alpha]);

  // Separability: each label's signature band exceeds the other labels' mean
  // power in that band by at least boost / 2.
  for (const auto& [label, sig] : cfg.band_signature) {
    double others = 0.0;
    int n = 0;
    for (const auto& [other, acc] : per_label) {
      if (other == label) continue;
      others += acc[sig.band_index];
      ++n;
    }
    others /= n;
    EXPECT_GE(per_label[label][sig.band_index] / others, sig.boost / 2.0) << label;
  }
}

TEST(CsvInterchange, IndexRoundTrip) {
  const auto set = oracle::small_recording(2, 1, 3, 3, 300);
  const auto dir = temp_dir("csv");
  std::ofstream index(dir / "index.csv");
  index << "file,subject,session,trial,label,fs\n";
  for (const auto& t : set.trials) {
    const std::string name = "s" + std::to_string(t.subject_id) + "_t" + std::to_string(t.trial_id) + ".csv";
    io::write_csv_trial(dir / name, t, set.channel_names);
    index << name << ',' << t.subject_id << ',' << t.session_id << ',' << t.trial_id << ',' << t.label << ','
          << t.fs << "\n";
  }
  index.close();
  const auto back = io::load_csv_index(dir / "index.csv", oracle::any_channels());
  ASSERT_EQ(back.trials.size(), set.trials.size());
  EXPECT_EQ(back.channel_names, set.channel_names);
  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    EXPECT_EQ(back.trials[i].label, set.trials[i].label);
    ASSERT_EQ(back.trials[i].data.size(), set.trials[i].data.size());
    for (std::size_t k = 0; k < set.trials[i].data.size(); ++k) {
      EXPECT_EQ(back.trials[i].data[k], set.trials[i].data[k]);
    }
  }
}
