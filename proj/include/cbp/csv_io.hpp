#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cbp/sample.hpp"

namespace cbp {

// Lines "# key=value" written before the header; readers skip them.
struct CsvMetadata {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }
};

// Full tree layout: n,Z,phi,Z0..Zsmax with one closing row holding only the
// final generation size (phi and the count columns empty).
// Path "-" writes to standard output.
void write_full_tree_csv(const std::string& path, const FullTreeSample& sample,
                         const CsvMetadata& meta = {});
void write_full_tree_csv(std::ostream& out, const FullTreeSample& sample,
                         const CsvMetadata& meta = {});
FullTreeSample read_full_tree_csv(const std::string& path);

// Column subsets of the full layout; the readers also accept full-tree files.
void write_progenitor_csv(const std::string& path, const ProgenitorSample& sample,
                          const CsvMetadata& meta = {});
void write_progenitor_csv(std::ostream& out, const ProgenitorSample& sample,
                          const CsvMetadata& meta = {});
ProgenitorSample read_progenitor_csv(const std::string& path);

void write_sizes_csv(const std::string& path, const SizesSample& sample,
                     const CsvMetadata& meta = {});
void write_sizes_csv(std::ostream& out, const SizesSample& sample,
                     const CsvMetadata& meta = {});
SizesSample read_sizes_csv(const std::string& path);

// Shortest representation that round-trips a double exactly (17 significant
// digits maximum).
std::string format_double(double value);

// Internal helpers shared with the CLI.
std::vector<std::string> split_csv_line(const std::string& line);
std::string join_csv(const std::vector<std::string>& fields);

}  // namespace cbp
