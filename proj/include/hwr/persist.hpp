#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace hwr {

/// Every persisted artifact is a text body wrapped in a two-line header:
///
///   hwr <kind> v<version>
///   checksum <fnv1a-64 of body, hex>
///
/// Readers reject other kinds, other versions and checksum mismatches.
inline constexpr int kFormatVersion = 1;

std::uint64_t fnv1a64(const std::string& data);

std::string wrap_document(const std::string& kind, const std::string& body, int version = kFormatVersion);
/// Returns the body; throws format, unsupported_version or checksum.
std::string unwrap_document(const std::string& text, const std::string& kind);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

inline void save_document(const std::filesystem::path& path, const std::string& kind, const std::string& body) {
  write_text_file(path, wrap_document(kind, body));
}
inline std::string load_document(const std::filesystem::path& path, const std::string& kind) {
  return unwrap_document(read_text_file(path), kind);
}

/// Kind named in a document header, without validating the rest.
std::string document_kind(const std::string& text);

}  // namespace hwr

namespace hwr {

/// Length-prefixed named section: "section <name> <bytes>\n<body>\n".
std::string make_section(const std::string& name, const std::string& body);

/// Sequential reader over concatenated sections.
class SectionReader {
 public:
  explicit SectionReader(std::string text) : text_(std::move(text)) {}

  /// Body of the next section; throws format unless it is named `name`.
  std::string next(const std::string& name);
  bool done() const noexcept { return pos_ >= text_.size(); }

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

}  // namespace hwr
