#include "eegclip/text/text_bank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegclip/binary_io.hpp"
#include "eegclip/error.hpp"
#include "eegclip/hash.hpp"

namespace eegclip::text {

namespace {

constexpr std::string_view kMagic = "EEGT";
constexpr std::uint32_t kVersion = 1;

struct Slot {
  std::size_t pos;
  std::size_t len;
};

/// Locates the single slot or throws.
Slot find_slot(const std::string& tmpl) {
  std::vector<Slot> slots;
  for (std::size_t i = tmpl.find('{'); i != std::string::npos; i = tmpl.find('{', i + 1)) {
    if (tmpl.compare(i, 7, "{label}") == 0) slots.push_back({i, 7});
    else if (tmpl.compare(i, 2, "{}") == 0) slots.push_back({i, 2});
  }
  if (slots.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "template must contain exactly one {label} slot: \"" + tmpl + "\"");
  }
  return slots[0];
}

void normalize(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss);
  if (!(n > 0.0)) throw Error(ErrorCode::kNonFinite, "cannot normalise a zero embedding");
  for (auto& x : v) x /= n;
}

}  // namespace

PromptTemplateSet PromptTemplateSet::builtin() {
  return {{
      "A video of {label} emotion",
      "The video makes the human feel {label}",
      "The human feels {} now",
      "A person experiencing {label} emotion",
      "This clip evokes a {label} feeling",
      "The viewer is in a {label} mood",
      "A recording of someone who feels {label}",
      "The emotion shown here is {label}",
      "Watching this makes one feel {label}",
      "Is the human feeling {label}?",
      "The subject's emotional state is {label}",
      "A brain signal of {label} emotion",
      "Right now the person feels {label}",
      "The film leaves the audience feeling {label}",
      "An EEG recording during {label} emotion",
      "Does this video make the human feel {label}?",
  }};
}

PromptTemplateSet PromptTemplateSet::parse(const std::string& text) {
  PromptTemplateSet set;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    set.templates.push_back(line);
  }
  set.validate();
  return set;
}

PromptTemplateSet PromptTemplateSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open template file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void PromptTemplateSet::validate() const {
  if (templates.size() != kTemplateCount) {
    throw Error(ErrorCode::kInvalidConfig, "expected " + std::to_string(kTemplateCount) + " templates, got " +
                                               std::to_string(templates.size()));
  }
  for (const auto& t : templates) find_slot(t);
}

std::vector<std::string> render_prompts(const std::string& label, const PromptTemplateSet& templates) {
  if (label.empty()) throw Error(ErrorCode::kInvalidArgument, "render_prompts: empty label");
  std::vector<std::string> out;
  out.reserve(templates.templates.size());
  for (const auto& t : templates.templates) {
    const Slot s = find_slot(t);
    out.push_back(t.substr(0, s.pos) + label + t.substr(s.pos + s.len));
  }
  return out;
}

std::vector<double> stub_embed(const std::string& text, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorCode::kInvalidArgument, "stub_embed: dim must be at least 8");
  std::mt19937_64 rng(fnv1a64(text) ^ seed_mix(seed, {dim}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  normalize(v);
  return v;
}

TextBank::TextBank(std::vector<std::string> labels, std::size_t dim, std::vector<double> rows, BankSource source,
                   std::string description)
    : labels_(std::move(labels)), dim_(dim), source_(source), description_(std::move(description)) {
  if (rows.size() != labels_.size() * dim_) {
    throw Error(ErrorCode::kShapeMismatch, "text bank: " + std::to_string(rows.size()) + " values for " +
                                               std::to_string(labels_.size()) + " x " + std::to_string(dim_));
  }
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    double ss = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) ss += rows[k * dim_ + j] * rows[k * dim_ + j];
    if (std::abs(std::sqrt(ss) - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "text bank vector for " + labels_[k] + " is not unit norm");
    }
  }
  matrix_ = ad::Tensor::from_values({labels_.size(), dim_}, std::move(rows), false);
}

std::span<const double> TextBank::vector(std::size_t k) const {
  if (k >= labels_.size()) throw Error(ErrorCode::kInvalidArgument, "text bank index out of range");
  return matrix_.values().subspan(k * dim_, dim_);
}

std::string TextBank::content_hash() const {
  std::string bytes;
  for (const auto& l : labels_) {
    bytes += l;
    bytes.push_back('\0');
  }
  const auto v = matrix_.values();
  bytes.append(reinterpret_cast<const char*>(v.data()), v.size_bytes());
  return sha1_hex(bytes);
}

void save_embedding_file(const EmbeddingFile& file, const std::filesystem::path& path) {
  if (file.values.size() != file.labels.size() * file.templates.size() * file.dim) {
    throw Error(ErrorCode::kShapeMismatch, "embedding file matrix does not match labels x templates x dim");
  }
  std::ostringstream out(std::ios::binary);
  binary::write_header(out, kMagic, kVersion,
                       {{"labels", file.labels}, {"templates", file.templates}, {"dim", file.dim}});
  binary::write_array(out, std::span<const float>(file.values));
  binary::write_file(path, out.str());
}

EmbeddingFile load_embedding_file(const std::filesystem::path& path) {
  std::istringstream in(binary::read_file(path), std::ios::binary);
  const auto header = binary::read_header(in, kMagic, "embedding file " + path.string());
  EmbeddingFile file;
  try {
    file.labels = header.json.at("labels").get<std::vector<std::string>>();
    file.templates = header.json.at("templates").get<std::vector<std::string>>();
    file.dim = header.json.at("dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, "embedding file " + path.string() + ": " + e.what());
  }
  file.values.resize(file.labels.size() * file.templates.size() * file.dim);
  if (!binary::read_array(in, std::span<float>(file.values))) {
    throw Error(ErrorCode::kTruncatedPayload, "embedding file " + path.string() + ": matrix truncated");
  }
  return file;
}

TextBank build_bank_stub(const std::vector<std::string>& labels, const PromptTemplateSet& templates,
                         std::size_t dim, std::uint64_t seed) {
  templates.validate();
  std::vector<double> rows;
  rows.reserve(labels.size() * dim);
  for (const auto& label : labels) {
    std::vector<double> acc(dim, 0.0);
    for (const auto& prompt : render_prompts(label, templates)) {
      const auto e = stub_embed(prompt, dim, seed);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += e[j];
    }
    for (auto& x : acc) x /= static_cast<double>(templates.templates.size());
    normalize(acc);
    rows.insert(rows.end(), acc.begin(), acc.end());
  }
  return TextBank(labels, dim, std::move(rows), BankSource::kStub,
                  "stub(dim=" + std::to_string(dim) + ", seed=" + std::to_string(seed) + ")");
}

TextBank build_bank_from_file(const std::vector<std::string>& labels, const PromptTemplateSet& templates,
                              const std::filesystem::path& path) {
  templates.validate();
  const EmbeddingFile file = load_embedding_file(path);
  if (file.dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding file " + path.string() + ": zero dim");
  const std::size_t n_templates = file.templates.size();
  std::vector<double> rows;
  rows.reserve(labels.size() * file.dim);
  for (const auto& label : labels) {
    const auto li = std::find(file.labels.begin(), file.labels.end(), label);
    if (li == file.labels.end()) {
      throw Error(ErrorCode::kInvalidArgument, "embedding file " + path.string() + " has no entries for label " + label);
    }
    const std::size_t l = static_cast<std::size_t>(li - file.labels.begin());
    std::vector<double> acc(file.dim, 0.0);
    for (const auto& tmpl : templates.templates) {
      const auto ti = std::find(file.templates.begin(), file.templates.end(), tmpl);
      if (ti == file.templates.end()) {
        throw Error(ErrorCode::kInvalidArgument, "embedding file " + path.string() + " is missing (" + label +
                                                     ", \"" + tmpl + "\")");
      }
      const std::size_t t = static_cast<std::size_t>(ti - file.templates.begin());
      const float* row = file.values.data() + (l * n_templates + t) * file.dim;
      for (std::size_t j = 0; j < file.dim; ++j) acc[j] += static_cast<double>(row[j]);
    }
    for (auto& x : acc) x /= static_cast<double>(templates.templates.size());
    normalize(acc);
    rows.insert(rows.end(), acc.begin(), acc.end());
  }
  return TextBank(labels, file.dim, std::move(rows), BankSource::kFile, "file:" + path.filename().string());
}

}  // namespace eegclip::text
