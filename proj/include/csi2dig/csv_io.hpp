#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "csi2dig/csi.hpp"
#include "csi2dig/errors.hpp"

namespace csi2dig {

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double_field(std::string_view s, size_t row, Errc code = Errc::malformed_row) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(code, "non-numeric field '" + std::string(s) + "' in row " + std::to_string(row));
  return v;
}

inline int64_t parse_int_field(std::string_view s, size_t row) {
  int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(Errc::malformed_row, "non-integer field '" + std::string(s) + "' in row " + std::to_string(row));
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// CSI CSV: first line `timestamp_us,source_id,a0,...,a{N-1}`, one frame per
// row, `\n` line endings.
inline CsiSequence parse_csi_file(std::string_view text) {
  if (text.empty()) fail(Errc::empty_file, "no header line");

  size_t pos = 0;
  auto next_line = [&](std::string_view& line) -> bool {
    if (pos >= text.size()) return false;
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, end - pos);
      pos = end + 1;
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  };

  std::string_view header;
  if (!next_line(header) || header.empty()) fail(Errc::empty_file, "no header line");

  auto cols = split_csv_line(header);
  if (cols.size() < 3 || cols[0] != "timestamp_us" || cols[1] != "source_id")
    fail(Errc::malformed_row, "bad header '" + std::string(header) + "'");
  size_t n_sub = cols.size() - 2;
  for (size_t i = 0; i < n_sub; ++i) {
    if (cols[2 + i] != "a" + std::to_string(i))
      fail(Errc::malformed_row, "bad amplitude column name '" + std::string(cols[2 + i]) + "'");
  }

  std::vector<CsiFrame> frames;
  std::string_view line;
  size_t row = 0;
  int64_t prev_ts = INT64_MIN;
  while (next_line(line)) {
    ++row;
    if (line.empty()) continue;  // tolerate trailing newline
    auto fields = split_csv_line(line);
    if (fields.size() != n_sub + 2)
      fail(Errc::malformed_row, "row " + std::to_string(row) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(n_sub + 2));
    CsiFrame f;
    f.timestamp_us = parse_int_field(fields[0], row);
    f.source_id = std::string(fields[1]);
    f.amplitudes.reserve(n_sub);
    for (size_t i = 0; i < n_sub; ++i) {
      double a = parse_double_field(fields[2 + i], row);
      if (!std::isfinite(a) || a < 0.0)
        fail(Errc::malformed_row, "row " + std::to_string(row) + " amplitude a" +
                                      std::to_string(i) + " must be finite and >= 0");
      f.amplitudes.push_back(a);
    }
    if (f.timestamp_us < prev_ts)
      fail(Errc::non_monotonic_timestamp, "timestamp decreases at row " + std::to_string(row));
    prev_ts = f.timestamp_us;
    frames.push_back(std::move(f));
  }

  auto layout = SubcarrierLayout::make(static_cast<int>(n_sub), {});
  return CsiSequence::create(std::move(layout), std::move(frames));
}

inline std::string write_csi_file(const CsiSequence& seq) {
  std::string out = "timestamp_us,source_id";
  size_t n_sub = seq.width();
  for (size_t i = 0; i < n_sub; ++i) out += ",a" + std::to_string(i);
  out += '\n';
  for (const CsiFrame& f : seq.frames) {
    out += std::to_string(f.timestamp_us);
    out += ',';
    out += f.source_id;
    for (double a : f.amplitudes) {
      out += ',';
      out += format_double(a);
    }
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::empty_file, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::bad_config, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline CsiSequence load_csi_file(const std::string& path) {
  return parse_csi_file(read_file(path));
}

inline void save_csi_file(const std::string& path, const CsiSequence& seq) {
  write_file(path, write_csi_file(seq));
}

}  // namespace csi2dig
