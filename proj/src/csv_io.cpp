#include "cbp/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cbp/errors.hpp"

namespace cbp {

namespace {

void write_metadata(std::ostream& out, const CsvMetadata& meta) {
  for (const auto& [key, value] : meta.entries) out << "# " << key << "=" << value << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

// Routes a streaming writer to a file, or to stdout for path "-".
template <typename Fn>
void to_path(const std::string& path, Fn fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  auto out = open_out(path);
  fn(out);
  if (!out) throw IoError("failed writing: " + path);
}

// Data lines of the file: metadata/comment and blank lines removed.
std::vector<std::string> read_data_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw SchemaError("empty csv file: " + path);
  return lines;
}

std::int64_t parse_count(const std::string& field, const std::string& what) {
  if (field.empty()) throw SchemaError("missing value for " + what);
  char* end = nullptr;
  long long v = std::strtoll(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0')
    throw SchemaError("not an integer for " + what + ": '" + field + "'");
  return static_cast<std::int64_t>(v);
}

struct Header {
  int col_n = -1, col_z = -1, col_phi = -1, col_z0 = -1;
  int n_count_cols = 0;  // contiguous Z0..Zk columns
};

Header parse_header(const std::string& line) {
  Header h;
  auto fields = split_csv_line(line);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string& f = fields[i];
    if (f == "n") h.col_n = static_cast<int>(i);
    else if (f == "Z") h.col_z = static_cast<int>(i);
    else if (f == "phi") h.col_phi = static_cast<int>(i);
    else if (f.size() >= 2 && f[0] == 'Z' && f != "Z") {
      int k = -1;
      try { k = std::stoi(f.substr(1)); } catch (...) { continue; }
      if (k == 0) h.col_z0 = static_cast<int>(i);
      if (h.col_z0 >= 0 && k == static_cast<int>(i) - h.col_z0) h.n_count_cols = k + 1;
    }
  }
  if (h.col_n < 0 || h.col_z < 0) throw SchemaError("csv header must contain columns n and Z");
  return h;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += fields[i];
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

void write_full_tree_csv(std::ostream& out, const FullTreeSample& sample,
                         const CsvMetadata& meta) {
  write_metadata(out, meta);
  int s = sample.s_max();
  out << "n,Z,phi";
  for (int k = 0; k <= s; ++k) out << ",Z" << k;
  out << "\n";
  auto z = sample.sizes();
  auto phi = sample.phis();
  for (int l = 0; l < sample.n(); ++l) {
    out << l << "," << z[static_cast<std::size_t>(l)] << "," << phi[static_cast<std::size_t>(l)];
    for (int k = 0; k <= s; ++k) out << "," << sample.counts()[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
    out << "\n";
  }
  out << sample.n() << "," << z.back();
  for (int k = 0; k <= s + 1; ++k) out << ",";
  out << "\n";
}

void write_full_tree_csv(const std::string& path, const FullTreeSample& sample,
                         const CsvMetadata& meta) {
  to_path(path, [&](std::ostream& out) { write_full_tree_csv(out, sample, meta); });
}

FullTreeSample read_full_tree_csv(const std::string& path) {
  auto lines = read_data_lines(path);
  Header h = parse_header(lines[0]);
  if (h.col_phi < 0 || h.col_z0 < 0 || h.n_count_cols < 2)
    throw SchemaError("full tree csv needs columns n,Z,phi,Z0..Zsmax: " + path);
  if (lines.size() < 3) throw SchemaError("full tree csv needs at least two generations: " + path);

  std::int64_t z0 = 0;
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> declared_z;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_csv_line(lines[r]);
    auto field = [&](int col) -> std::string {
      return col < static_cast<int>(fields.size()) ? fields[static_cast<std::size_t>(col)] : "";
    };
    std::int64_t row_n = parse_count(field(h.col_n), "column n");
    if (row_n != static_cast<std::int64_t>(r) - 1)
      throw SchemaError("generation column must run 0..n in order");
    declared_z.push_back(parse_count(field(h.col_z), "column Z"));
    if (r == 1) z0 = declared_z[0];
    bool last = r + 1 == lines.size();
    if (last) {
      if (!field(h.col_phi).empty() || !field(h.col_z0).empty())
        throw SchemaError("closing row must leave phi and count columns empty");
      continue;
    }
    std::vector<std::int64_t> row(static_cast<std::size_t>(h.n_count_cols));
    std::int64_t phi = parse_count(field(h.col_phi), "column phi");
    std::int64_t phi_sum = 0;
    for (int k = 0; k < h.n_count_cols; ++k) {
      row[static_cast<std::size_t>(k)] = parse_count(field(h.col_z0 + k), "count column");
      phi_sum += row[static_cast<std::size_t>(k)];
    }
    if (phi_sum != phi)
      throw SchemaError("row " + std::to_string(row_n) + ": phi does not equal the count row sum");
    counts.push_back(std::move(row));
  }
  FullTreeSample sample(z0, std::move(counts));
  auto derived = sample.sizes();
  for (std::size_t l = 0; l < derived.size(); ++l)
    if (derived[l] != declared_z[l])
      throw SchemaError("row " + std::to_string(l) +
                        ": declared Z does not match the offspring sum of the previous row");
  return sample;
}

void write_progenitor_csv(std::ostream& out, const ProgenitorSample& sample,
                          const CsvMetadata& meta) {
  write_metadata(out, meta);
  out << "n,Z,phi\n";
  for (std::size_t l = 0; l < sample.phi.size(); ++l)
    out << l << "," << sample.z[l] << "," << sample.phi[l] << "\n";
  out << sample.phi.size() << "," << sample.z.back() << ",\n";
}

void write_progenitor_csv(const std::string& path, const ProgenitorSample& sample,
                          const CsvMetadata& meta) {
  to_path(path, [&](std::ostream& out) { write_progenitor_csv(out, sample, meta); });
}

ProgenitorSample read_progenitor_csv(const std::string& path) {
  auto lines = read_data_lines(path);
  Header h = parse_header(lines[0]);
  if (h.col_phi < 0)
    throw SchemaError("progenitor csv needs columns n,Z,phi (sizes-only file given): " + path);
  ProgenitorSample sample;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_csv_line(lines[r]);
    auto field = [&](int col) -> std::string {
      return col < static_cast<int>(fields.size()) ? fields[static_cast<std::size_t>(col)] : "";
    };
    if (parse_count(field(h.col_n), "column n") != static_cast<std::int64_t>(r) - 1)
      throw SchemaError("generation column must run 0..n in order");
    sample.z.push_back(parse_count(field(h.col_z), "column Z"));
    bool last = r + 1 == lines.size();
    if (last) {
      if (!field(h.col_phi).empty())
        throw SchemaError("closing row must leave phi empty");
    } else {
      sample.phi.push_back(parse_count(field(h.col_phi), "column phi"));
    }
  }
  sample.validate();
  return sample;
}

void write_sizes_csv(std::ostream& out, const SizesSample& sample, const CsvMetadata& meta) {
  write_metadata(out, meta);
  out << "n,Z\n";
  for (std::size_t l = 0; l < sample.z.size(); ++l) out << l << "," << sample.z[l] << "\n";
}

void write_sizes_csv(const std::string& path, const SizesSample& sample,
                     const CsvMetadata& meta) {
  to_path(path, [&](std::ostream& out) { write_sizes_csv(out, sample, meta); });
}

SizesSample read_sizes_csv(const std::string& path) {
  auto lines = read_data_lines(path);
  Header h = parse_header(lines[0]);
  SizesSample sample;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_csv_line(lines[r]);
    auto field = [&](int col) -> std::string {
      return col < static_cast<int>(fields.size()) ? fields[static_cast<std::size_t>(col)] : "";
    };
    if (parse_count(field(h.col_n), "column n") != static_cast<std::int64_t>(r) - 1)
      throw SchemaError("generation column must run 0..n in order");
    sample.z.push_back(parse_count(field(h.col_z), "column Z"));
  }
  sample.validate();
  return sample;
}

}  // namespace cbp
