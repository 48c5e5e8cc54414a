#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eegclip/autodiff/tensor.hpp"

namespace eegclip::text {

inline constexpr std::size_t kTemplateCount = 16;

/// Exactly 16 templates, each with one "{label}" or "{}" slot.
struct PromptTemplateSet {
  std::vector<std::string> templates;

  /// The shipped set (same content as data/prompt_templates.txt).
  static PromptTemplateSet builtin();
  /// One template per line; blank lines and '#' comments skipped.
  static PromptTemplateSet parse(const std::string& text);
  static PromptTemplateSet load(const std::filesystem::path& path);
  void validate() const;
};

/// Substitutes `label` into every template, preserving order.
std::vector<std::string> render_prompts(const std::string& label, const PromptTemplateSet& templates);

/// Deterministic unit vector seeded by a hash of `text` and `seed`.
std::vector<double> stub_embed(const std::string& text, std::size_t dim, std::uint64_t seed = 0);

enum class BankSource { kFile, kStub };

/// Frozen per-class unit vectors. The matrix never requires a gradient.
class TextBank {
 public:
  TextBank(std::vector<std::string> labels, std::size_t dim, std::vector<double> rows, BankSource source,
           std::string description);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::span<const double> vector(std::size_t k) const;
  /// [K, dim]
  const ad::Tensor& matrix() const { return matrix_; }
  BankSource source() const { return source_; }
  const std::string& description() const { return description_; }
  /// SHA-1 over the labels and the raw vector bytes.
  std::string content_hash() const;

 private:
  std::vector<std::string> labels_;
  std::size_t dim_;
  ad::Tensor matrix_;
  BankSource source_;
  std::string description_;
};

/// Precomputed prompt embeddings: one row per (label, template), label-major.
struct EmbeddingFile {
  std::vector<std::string> labels;
  std::vector<std::string> templates;
  std::size_t dim = 0;
  std::vector<float> values;
};

/// "EEGT" container: JSON manifest (labels, templates, dim) + f32 matrix.
void save_embedding_file(const EmbeddingFile& file, const std::filesystem::path& path);
EmbeddingFile load_embedding_file(const std::filesystem::path& path);

/// Per class: mean of the 16 template embeddings, then unit-normalised.
TextBank build_bank_stub(const std::vector<std::string>& labels, const PromptTemplateSet& templates,
                         std::size_t dim, std::uint64_t seed = 0);
TextBank build_bank_from_file(const std::vector<std::string>& labels, const PromptTemplateSet& templates,
                              const std::filesystem::path& path);

}  // namespace eegclip::text
