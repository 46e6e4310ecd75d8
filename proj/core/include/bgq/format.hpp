#pragma once

#include <ios>
#include <locale>
#include <string>

namespace bgq {

// Locale-independent, 17 significant digits, always with a '.' or exponent
// so the value reads back as floating point ("1" prints as "1.0").
std::string format_double(double value);

// Imbues the classic locale on a stream for the lifetime of the scope, so
// integers written with << are never digit-grouped.
class ClassicLocaleScope {
 public:
  explicit ClassicLocaleScope(std::ios_base& stream)
      : stream_(stream), saved_(stream.imbue(std::locale::classic())) {}
  ~ClassicLocaleScope() { stream_.imbue(saved_); }
  ClassicLocaleScope(const ClassicLocaleScope&) = delete;
  ClassicLocaleScope& operator=(const ClassicLocaleScope&) = delete;

 private:
  std::ios_base& stream_;
  std::locale saved_;
};

}  // namespace bgq
