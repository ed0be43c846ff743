#ifndef COEVO_CSV_HPP
#define COEVO_CSV_HPP

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coevo {

inline constexpr const char* kVersion = "0.1.0";

/// Locale-independent number formatting ('.' decimal, shortest-ish form) so
/// identical runs produce byte-identical files.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string format_number(long long v) { return std::to_string(v); }
inline std::string format_number(unsigned long long v) { return std::to_string(v); }

/// Minimal CSV writer: optional '#'-prefixed metadata lines, one header row,
/// then data rows.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace coevo

#endif
