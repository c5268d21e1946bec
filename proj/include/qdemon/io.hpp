#pragma once

// Flat-file serialization: transcripts and heat records as CSV, plus small
// formatting helpers. Doubles are written with %.17g so every value
// round-trips exactly and output bytes are reproducible.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdemon/protocol.hpp"

namespace qdemon {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() + " for reading");
  }
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

inline std::string transcript_to_csv(const Transcript& t) {
  std::string out = "run_index,setting_a,setting_b,declared_a,measured_b,demon_active\n";
  out.reserve(out.size() + t.records.size() * 24);
  char buf[96];
  for (const RunRecord& r : t.records) {
    const int n = std::snprintf(buf, sizeof buf, "%lld,%d,%d,%d,%d,%d\n", r.run_index, r.setting_a,
                                r.setting_b, r.declared_a, r.measured_b, r.demon_active ? 1 : 0);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

inline void write_transcript_csv(const std::filesystem::path& path, const Transcript& t) {
  write_text_file(path, transcript_to_csv(t));
}

inline std::string heat_record_to_csv(std::span<const double> heat) {
  std::string out = "run_index,joules\n";
  out.reserve(out.size() + heat.size() * 28);
  char buf[96];
  for (std::size_t i = 0; i < heat.size(); ++i) {
    const int n = std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, heat[i]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

inline void write_heat_csv(const std::filesystem::path& path, std::span<const double> heat) {
  write_text_file(path, heat_record_to_csv(heat));
}

inline std::vector<double> read_heat_csv(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::vector<double> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string line = content.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != "run_index,joules") {
        throw std::runtime_error(path.string() + ": expected header 'run_index,joules'");
      }
      header = false;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path.string() + ": malformed heat record line '" + line + "'");
    }
    try {
      out.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ": malformed joules value in '" + line + "'");
    }
  }
  if (header) {
    throw std::runtime_error(path.string() + ": empty heat record file");
  }
  return out;
}

}  // namespace qdemon
