#include "kmv/csv.hpp"

#include "kmv/config.hpp"
#include "kmv/errors.hpp"

namespace kmv {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) {
    throw LengthMismatch(path_.string() + ": row has " + std::to_string(values.size()) +
                         " columns, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_double(values[i]);
  }
  buffer_ += '\n';
  if (buffer_.size() > (1u << 16)) {
    out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    buffer_.clear();
  }
}

void CsvWriter::close() {
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  buffer_.clear();
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
  out_.close();
}

void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows) {
  CsvWriter w(path, header);
  for (const auto& r : rows) w.row(r);
  w.close();
}

void write_field_csv(const std::filesystem::path& path, const HistoryField& field) {
  CsvWriter w(path, {"x", "U", "V"});
  const auto& grid = field.grid();
  for (std::size_t g = 0; g < grid.n_nodes(); ++g) {
    w.row({grid.node(g), field.U()[g], field.V()[g]});
  }
  w.close();
}

}  // namespace kmv
