#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "kmv/history_field.hpp"

namespace kmv {

// Streams rows of numbers to a CSV file: LF line endings, shortest
// round-trip float text, identical bytes for identical inputs.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  // Flushes and reports any pending IO failure.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::string buffer_;
};

void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows);

// Debug dump of the history field: header x,U,V.
void write_field_csv(const std::filesystem::path& path, const HistoryField& field);

}  // namespace kmv
