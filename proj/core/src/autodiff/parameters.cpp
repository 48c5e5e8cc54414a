#include "eegclip/autodiff/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegclip/binary_io.hpp"
#include "eegclip/error.hpp"
#include "eegclip/hash.hpp"

namespace eegclip::ad {

namespace {
constexpr std::string_view kMagic = "EEGP";
constexpr std::uint32_t kVersion = 1;
}  // namespace

Tensor ParameterStore::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw Error(ErrorCode::kInvalidArgument, "duplicate parameter name: " + name);
  Tensor t = Tensor::from_values(std::move(shape), std::move(values), true);
  params_.push_back({name, t});
  return t;
}

Tensor ParameterStore::xavier(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::mt19937_64 rng(seed_mix(seed_, {fnv1a64(name)}));
  std::vector<double> values(numel(shape));
  for (auto& v : values) {
    // 53-bit uniform in [0, 1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * bound;
  }
  return add(name, std::move(shape), std::move(values));
}

Tensor ParameterStore::constant(const std::string& name, Shape shape, double value) {
  const std::size_t n = numel(shape);
  return add(name, std::move(shape), std::vector<double>(n, value));
}

const Tensor& ParameterStore::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown parameter: " + name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const NamedParameter& p) { return p.name == name; });
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterStore::snapshot() const {
  std::vector<std::vector<double>> snap;
  snap.reserve(params_.size());
  for (const auto& p : params_) snap.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return snap;
}

void ParameterStore::restore(const std::vector<std::vector<double>>& snap) {
  if (snap.size() != params_.size()) throw Error(ErrorCode::kShapeMismatch, "snapshot parameter count differs");
  for (std::size_t i = 0; i < snap.size(); ++i) {
    auto dst = params_[i].tensor.mutable_values();
    if (snap[i].size() != dst.size()) throw Error(ErrorCode::kShapeMismatch, "snapshot size differs for " + params_[i].name);
    std::copy(snap[i].begin(), snap[i].end(), dst.begin());
  }
}

std::string ParameterStore::serialize() const {
  nlohmann::json header;
  header["seed"] = seed_;
  header["step"] = step_;
  auto& list = header["parameters"] = nlohmann::json::array();
  for (const auto& p : params_) list.push_back({{"name", p.name}, {"shape", p.tensor.shape()}});
  std::ostringstream out(std::ios::binary);
  binary::write_header(out, kMagic, kVersion, header);
  for (const auto& p : params_) binary::write_array(out, p.tensor.values());
  return out.str();
}

void ParameterStore::deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  const auto header = binary::read_header(in, kMagic, "checkpoint");
  const auto& list = header.json.at("parameters");
  if (list.size() != params_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint holds " + std::to_string(list.size()) + " parameters, model has " +
                                               std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto name = list[i].at("name").get<std::string>();
    const auto shape = list[i].at("shape").get<Shape>();
    if (name != params_[i].name || shape != params_[i].tensor.shape()) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint entry " + name + " " + to_string(shape) +
                                                 " does not match " + params_[i].name);
    }
  }
  std::vector<std::vector<double>> snap;
  for (const auto& p : params_) {
    std::vector<double> values(p.tensor.numel());
    if (!binary::read_array(in, std::span<double>(values))) {
      throw Error(ErrorCode::kTruncatedPayload, "checkpoint payload truncated at " + p.name);
    }
    snap.push_back(std::move(values));
  }
  restore(snap);
  seed_ = header.json.at("seed").get<std::uint64_t>();
  step_ = header.json.at("step").get<std::uint64_t>();
}

void ParameterStore::save(const std::filesystem::path& path) const { binary::write_file(path, serialize()); }

void ParameterStore::load(const std::filesystem::path& path) { deserialize(binary::read_file(path)); }

}  // namespace eegclip::ad
