#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hotspot::csv {

/// Streaming reader for comma-separated text with double-quote quoting
/// (RFC 4180). Quoted fields may span lines; "" inside quotes is a literal
/// quote. Holds one record at a time.
class Reader {
 public:
  explicit Reader(std::istream& in, char delimiter = ',');

  /// Reads the next record into `fields`. Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  /// 1-based line number where the most recent record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  bool first_ = true;
};

/// Quotes a field if it contains the delimiter, a quote or a line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace hotspot::csv
