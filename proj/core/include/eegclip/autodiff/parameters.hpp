#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegclip/autodiff/tensor.hpp"

namespace eegclip::ad {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

/// Owns every learnable tensor of a model under a unique name. Tensors are
/// shared handles, so layers keep a copy and updates through the store are
/// visible to them.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}

  /// Uniform in +/- sqrt(6 / (fan_in + fan_out)). The draw depends only on
  /// the store seed and the name.
  Tensor xavier(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out);
  Tensor constant(const std::string& name, Shape shape, double value);
  Tensor zeros(const std::string& name, Shape shape) { return constant(name, std::move(shape), 0.0); }
  Tensor ones(const std::string& name, Shape shape) { return constant(name, std::move(shape), 1.0); }

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<NamedParameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  void zero_grad();

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& snap);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }

  /// "EEGP" container: JSON manifest (names, shapes, seed, step) followed by
  /// the f64 values in manifest order.
  std::string serialize() const;
  /// Loads values into this store; names and shapes must match exactly.
  void deserialize(const std::string& bytes);
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  Tensor add(const std::string& name, Shape shape, std::vector<double> values);

  std::uint64_t seed_;
  std::uint64_t step_ = 0;
  std::vector<NamedParameter> params_;
};

}  // namespace eegclip::ad
