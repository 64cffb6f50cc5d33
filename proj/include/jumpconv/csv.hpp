#pragma once

// RFC-4180 CSV emission with locale-independent, shortest round-trip
// number formatting.

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>

namespace jumpconv::csv {

inline std::string number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Writes cells separated by ',' and terminated by CRLF.
class RowWriter {
 public:
  explicit RowWriter(std::ostream& os) : os_(os) {}

  RowWriter& cell(std::string_view s) {
    sep();
    os_ << field(s);
    return *this;
  }
  RowWriter& cell(double x) {
    sep();
    os_ << number(x);
    return *this;
  }
  RowWriter& cell(std::size_t n) {
    sep();
    os_ << n;
    return *this;
  }
  RowWriter& cell(int n) {
    sep();
    os_ << n;
    return *this;
  }
  void end() {
    os_ << "\r\n";
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace jumpconv::csv
