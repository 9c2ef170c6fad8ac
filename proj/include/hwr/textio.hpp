#pragma once

#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "hwr/error.hpp"

namespace hwr::textio {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Fixed significant-digit rendering for human-facing dumps.
std::string format_double(double v, int significant_digits);

/// Whitespace token reader over a text body with keyed-field helpers.
class Reader {
 public:
  explicit Reader(const std::string& body) : in_(body) {}

  std::string word();
  double number();
  long long integer();
  unsigned long long unsigned_integer();
  /// Reads a token and checks that it equals `key`.
  void expect(const std::string& key);

  template <typename T = long long>
  T keyed_integer(const std::string& key) {
    expect(key);
    if constexpr (std::is_unsigned_v<T>)
      return static_cast<T>(unsigned_integer());
    else
      return static_cast<T>(integer());
  }
  double keyed_number(const std::string& key) {
    expect(key);
    return number();
  }
  std::string keyed_word(const std::string& key) {
    expect(key);
    return word();
  }

 private:
  std::istringstream in_;
};

}  // namespace hwr::textio
