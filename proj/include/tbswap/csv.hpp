#pragma once

// Tabular output with a fixed number format, and the append-only run
// directory that stores it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace tbswap {

// printf("%.12g").
std::string format_double(double v);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void add_row(std::vector<std::string> cells);
  int column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& cell(std::size_t row, const std::string& name) const;

  std::string str() const;
  void write(const std::filesystem::path& path) const;
  static CsvTable parse(const std::string& text);
  static CsvTable read(const std::filesystem::path& path);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// A fresh numbered subdirectory run-NNNN of root; earlier runs are never
// touched. Artifacts are hashed into manifest.json on finalize().
class RunDirectory {
 public:
  RunDirectory(const std::filesystem::path& root, std::string command);

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path add_table(const std::string& file, const CsvTable& table, const std::string& description);
  std::filesystem::path add_text(const std::string& file, const std::string& text, const std::string& description);
  void set_params(nlohmann::json params) { params_ = std::move(params); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }
  void finalize();

 private:
  std::filesystem::path path_;
  std::string command_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json notes_ = nlohmann::json::object();
  nlohmann::json artifacts_ = nlohmann::json::array();
  std::uint64_t seed_ = 0;
};

}  // namespace tbswap
