#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stacknash/field.hpp"

namespace stacknash {

/// Formats a double with 17 significant digits (value-preserving round trip).
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& schema,
            const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  void* file_;
};

/// Writes a trajectory as (t, x, value) triples.
void write_field_csv(const std::string& path, const std::string& schema,
                     const SpaceTimeField& f);

std::uint64_t fnv1a_hash(const std::string& bytes);
std::string read_file(const std::string& path);
bool files_identical(const std::string& a, const std::string& b);

}  // namespace stacknash
