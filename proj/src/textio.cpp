#include "hwr/textio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace hwr::textio {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_double(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
  return buf;
}

std::string Reader::word() {
  std::string w;
  if (!(in_ >> w)) throw Error(ErrorCode::format, "unexpected end of document");
  return w;
}

double Reader::number() {
  const std::string w = word();
  double v = 0.0;
  const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
  if (res.ec != std::errc() || res.ptr != w.data() + w.size())
    throw Error(ErrorCode::format, "expected a number, got '" + w + "'");
  return v;
}

long long Reader::integer() {
  const std::string w = word();
  long long v = 0;
  const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
  if (res.ec != std::errc() || res.ptr != w.data() + w.size())
    throw Error(ErrorCode::format, "expected an integer, got '" + w + "'");
  return v;
}

unsigned long long Reader::unsigned_integer() {
  const std::string w = word();
  unsigned long long v = 0;
  const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
  if (res.ec != std::errc() || res.ptr != w.data() + w.size())
    throw Error(ErrorCode::format, "expected an unsigned integer, got '" + w + "'");
  return v;
}

void Reader::expect(const std::string& key) {
  const std::string w = word();
  if (w != key) throw Error(ErrorCode::format, "expected '" + key + "', got '" + w + "'");
}

}  // namespace hwr::textio
