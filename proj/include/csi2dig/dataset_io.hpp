#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csi2dig/csi.hpp"
#include "csi2dig/csv_io.hpp"
#include "csi2dig/errors.hpp"

namespace csi2dig {

// Dataset directory layout:
//   manifest.csv  header `file,label,device,distance,volume`, one sample/row
//   classes.txt   one class name per line
//   sample_NNNNN.csv  N_t rows of N_s comma-separated values, no header
inline void write_dataset(const std::string& dir, const Dataset& ds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::string manifest = "file,label,device,distance,volume\n";
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05zu.csv", i);
    std::string body;
    body.reserve(s.values.size() * 8);
    for (size_t r = 0; r < s.n_rows; ++r) {
      for (size_t c = 0; c < s.n_cols; ++c) {
        if (c) body += ',';
        body += format_double(s.at(r, c));
      }
      body += '\n';
    }
    write_file((fs::path(dir) / name).string(), body);

    auto meta_or = [&](const char* key) {
      auto it = s.meta.find(key);
      return it == s.meta.end() ? std::string() : it->second;
    };
    manifest += std::string(name) + ',' + (s.label ? std::to_string(*s.label) : std::string()) +
                ',' + meta_or("device") + ',' + meta_or("distance") + ',' + meta_or("volume") +
                '\n';
  }
  write_file((fs::path(dir) / "manifest.csv").string(), manifest);

  std::string classes;
  for (const std::string& name : ds.class_names) classes += name + '\n';
  write_file((fs::path(dir) / "classes.txt").string(), classes);
}

inline Dataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;

  std::string classes = read_file((fs::path(dir) / "classes.txt").string());
  size_t pos = 0;
  while (pos < classes.size()) {
    size_t end = classes.find('\n', pos);
    if (end == std::string::npos) end = classes.size();
    if (end > pos) ds.class_names.push_back(classes.substr(pos, end - pos));
    pos = end + 1;
  }

  std::string manifest = read_file((fs::path(dir) / "manifest.csv").string());
  pos = 0;
  size_t row = 0;
  while (pos < manifest.size()) {
    size_t end = manifest.find('\n', pos);
    if (end == std::string::npos) end = manifest.size();
    std::string_view line(manifest.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    ++row;
    if (row == 1) {
      if (line != "file,label,device,distance,volume")
        fail(Errc::malformed_row, "bad manifest header");
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 5) fail(Errc::malformed_row, "manifest row " + std::to_string(row));

    std::string body = read_file((fs::path(dir) / std::string(fields[0])).string());
    Sample s;
    size_t bpos = 0;
    while (bpos < body.size()) {
      size_t bend = body.find('\n', bpos);
      if (bend == std::string::npos) bend = body.size();
      std::string_view bline(body.data() + bpos, bend - bpos);
      bpos = bend + 1;
      if (bline.empty()) continue;
      auto cells = split_csv_line(bline);
      if (s.n_cols == 0)
        s.n_cols = cells.size();
      else if (cells.size() != s.n_cols)
        fail(Errc::malformed_row, "ragged sample matrix in " + std::string(fields[0]));
      for (auto cell : cells) s.values.push_back(parse_double_field(cell, s.n_rows + 1));
      ++s.n_rows;
    }
    if (!fields[1].empty()) s.label = static_cast<int>(parse_int_field(fields[1], row));
    if (!fields[2].empty()) s.meta["device"] = std::string(fields[2]);
    if (!fields[3].empty()) s.meta["distance"] = std::string(fields[3]);
    if (!fields[4].empty()) s.meta["volume"] = std::string(fields[4]);
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

}  // namespace csi2dig
