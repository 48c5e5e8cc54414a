#include "eegclip/binary_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "eegclip/error.hpp"

namespace eegclip::binary {

void write_header(std::ostream& out, std::string_view magic, std::uint32_t version,
                  const nlohmann::json& header) {
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Header read_header(std::istream& in, std::string_view magic, const std::string& what) {
  std::array<char, 4> got{};
  in.read(got.data(), 4);
  if (in.gcount() != 4 || std::string_view(got.data(), 4) != magic) {
    throw Error(ErrorCode::kMalformedHeader,
                what + ": bad magic (expected \"" + std::string(magic) + "\")");
  }
  Header h;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&h.version), sizeof h.version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in) throw Error(ErrorCode::kMalformedHeader, what + ": truncated framing");
  if (len > (std::uint64_t{1} << 32)) {
    throw Error(ErrorCode::kMalformedHeader, what + ": implausible header length");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len) {
    throw Error(ErrorCode::kMalformedHeader, what + ": header shorter than declared length");
  }
  try {
    h.json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedHeader, what + ": header is not valid JSON: " + e.what());
  }
  return h;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace eegclip::binary
