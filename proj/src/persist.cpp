#include "hwr/persist.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hwr/error.hpp"

namespace hwr {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string wrap_document(const std::string& kind, const std::string& body, int version) {
  return "hwr " + kind + " v" + std::to_string(version) + "\nchecksum " + hex64(fnv1a64(body)) + "\n" + body;
}

std::string unwrap_document(const std::string& text, const std::string& kind) {
  const auto first = text.find('\n');
  const auto second = first == std::string::npos ? first : text.find('\n', first + 1);
  if (second == std::string::npos) throw Error(ErrorCode::checksum, "document header is truncated");

  std::istringstream header(text.substr(0, first));
  std::string magic, found_kind, version;
  header >> magic >> found_kind >> version;
  if (magic != "hwr") throw Error(ErrorCode::format, "not an hwr document");
  if (found_kind != kind) throw Error(ErrorCode::format, "expected a '" + kind + "' document, found '" + found_kind + "'");
  if (version != "v" + std::to_string(kFormatVersion))
    throw Error(ErrorCode::unsupported_version,
                "'" + kind + "' document version " + version + " is not supported (expected v" +
                    std::to_string(kFormatVersion) + ")");

  const std::string checksum_line = text.substr(first + 1, second - first - 1);
  const std::string body = text.substr(second + 1);
  if (checksum_line != "checksum " + hex64(fnv1a64(body)))
    throw Error(ErrorCode::checksum, "'" + kind + "' document is corrupt or truncated");
  return body;
}

std::string document_kind(const std::string& text) {
  std::istringstream header(text.substr(0, text.find('\n')));
  std::string magic, kind;
  header >> magic >> kind;
  if (magic != "hwr") throw Error(ErrorCode::format, "not an hwr document");
  return kind;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace hwr

namespace hwr {

std::string make_section(const std::string& name, const std::string& body) {
  return "section " + name + " " + std::to_string(body.size()) + "\n" + body + "\n";
}

std::string SectionReader::next(const std::string& name) {
  const auto eol = text_.find('\n', pos_);
  if (eol == std::string::npos) throw Error(ErrorCode::format, "missing section '" + name + "'");
  std::istringstream header(text_.substr(pos_, eol - pos_));
  std::string tag, found;
  std::size_t size = 0;
  if (!(header >> tag >> found >> size) || tag != "section")
    throw Error(ErrorCode::format, "malformed section header");
  if (found != name) throw Error(ErrorCode::format, "expected section '" + name + "', found '" + found + "'");
  if (eol + 1 + size + 1 > text_.size()) throw Error(ErrorCode::format, "section '" + name + "' is truncated");
  std::string body = text_.substr(eol + 1, size);
  pos_ = eol + 1 + size + 1;
  return body;
}

}  // namespace hwr
