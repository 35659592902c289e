#include "stacknash/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stacknash {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& header)
    : path_(path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  file_ = f;
  std::fprintf(f, "# schema: %s\n", schema.c_str());
  for (std::size_t i = 0; i < header.size(); ++i)
    std::fprintf(f, "%s%s", header[i].c_str(), i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(static_cast<std::FILE*>(file_));
}

void CsvWriter::row(const std::vector<double>& values) {
  std::FILE* f = static_cast<std::FILE*>(file_);
  for (std::size_t i = 0; i < values.size(); ++i)
    std::fprintf(f, "%s%s", format_double(values[i]).c_str(),
                 i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::string& line) {
  std::fprintf(static_cast<std::FILE*>(file_), "%s\n", line.c_str());
}

void write_field_csv(const std::string& path, const std::string& schema,
                     const SpaceTimeField& f) {
  CsvWriter csv(path, schema, {"t", "x", "value"});
  const Grid& g = f.grid();
  for (int n = 0; n <= g.time_steps(); ++n)
    for (int j = 0; j <= g.space_cells(); ++j)
      csv.row({g.time(n), g.node(j), f(n, j)});
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool files_identical(const std::string& a, const std::string& b) {
  return read_file(a) == read_file(b);
}

}  // namespace stacknash
