#include "tbswap/csv.hpp"

#include "tbswap/errors.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace tbswap {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ShapeError("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ShapeError("CSV row width does not match the header");
  rows_.push_back(std::move(cells));
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  throw ShapeError("no CSV column " + name);
}

const std::string& CsvTable::cell(std::size_t row, const std::string& name) const {
  return rows_.at(row).at(column(name));
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& s = cell(row, name);
  if (s.empty()) throw ShapeError("empty CSV cell in column " + name);
  return std::stod(s);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += quote(cells[i]);
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

void CsvTable::write(const fs::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << str();
}

CsvTable CsvTable::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ShapeError("empty CSV");
  CsvTable t(split_line(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.add_row(split_line(line));
  }
  return t;
}

CsvTable CsvTable::read(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return sha256_hex(ss.str());
}

RunDirectory::RunDirectory(const fs::path& root, std::string command) : command_(std::move(command)) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw ConfigError("cannot create output directory " + root.string());
  for (int i = 1; i < 100000; ++i) {
    std::ostringstream name;
    name << "run-" << std::setw(4) << std::setfill('0') << i;
    const fs::path candidate = root / name.str();
    // create_directory reports false when the entry exists, which makes the
    // choice safe against concurrent runs sharing a root.
    if (fs::create_directory(candidate, ec)) {
      path_ = candidate;
      return;
    }
    if (ec) throw ConfigError("cannot create run directory under " + root.string());
  }
  throw CapacityError("too many runs under " + root.string());
}

fs::path RunDirectory::add_table(const std::string& file, const CsvTable& table, const std::string& description) {
  const fs::path p = path_ / file;
  table.write(p);
  artifacts_.push_back({{"file", file},
                        {"sha256", sha256_file(p)},
                        {"rows", table.size()},
                        {"columns", table.header()},
                        {"description", description}});
  return p;
}

fs::path RunDirectory::add_text(const std::string& file, const std::string& text, const std::string& description) {
  const fs::path p = path_ / file;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
  f.close();
  artifacts_.push_back({{"file", file}, {"sha256", sha256_file(p)}, {"description", description}});
  return p;
}

void RunDirectory::finalize() {
  nlohmann::json m = {{"schema_version", 1},
                      {"command", command_},
                      {"seed", seed_},
                      {"params", params_},
                      {"artifacts", artifacts_}};
  if (!notes_.empty()) m["notes"] = notes_;
  std::ofstream f(path_ / "manifest.json", std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest");
  f << m.dump(2) << '\n';
}

}  // namespace tbswap
