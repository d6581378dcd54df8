#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmdp {

/// Shortest round-trip decimal rendering; locale-independent and
/// byte-identical across runs, unlike stream output.
inline std::string format_double(double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buffer, ptr);
}

inline constexpr const char* kCsvHeader =
    "episode,algo,eta,tau,lambda_max,run,subopt,violation_max,strong_reg_r,strong_reg_u,"
    "weak_reg_r,weak_reg_u,eps_unsafe_count";

/// One row of the experiment CSV schema.
struct CsvRow {
  std::int64_t episode = 0;
  std::string algo;
  double eta = 0.0;
  double tau = 0.0;
  double lambda_max = 0.0;
  std::int64_t run = 0;
  double subopt = 0.0;
  double violation_max = 0.0;
  double strong_reg_r = 0.0;
  double strong_reg_u = 0.0;
  double weak_reg_r = 0.0;
  double weak_reg_u = 0.0;
  double eps_unsafe_count = 0.0;  // averaged curves make this fractional
};

inline void append_csv_row(std::string& out, const CsvRow& row) {
  out += std::to_string(row.episode);
  out += ',';
  out += row.algo;
  out += ',';
  out += format_double(row.eta);
  out += ',';
  out += format_double(row.tau);
  out += ',';
  out += format_double(row.lambda_max);
  out += ',';
  out += std::to_string(row.run);
  out += ',';
  out += format_double(row.subopt);
  out += ',';
  out += format_double(row.violation_max);
  out += ',';
  out += format_double(row.strong_reg_r);
  out += ',';
  out += format_double(row.strong_reg_u);
  out += ',';
  out += format_double(row.weak_reg_r);
  out += ',';
  out += format_double(row.weak_reg_u);
  out += ',';
  out += format_double(row.eps_unsafe_count);
  out += '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline double parse_double(const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::runtime_error("parse_double: bad number '" + text + "'");
  return value;
}

}  // namespace cmdp
