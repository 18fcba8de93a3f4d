#include "cdmca/io.hpp"

#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "cdmca/error.hpp"

namespace cdmca {

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_double17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_double(const std::string& field, const std::string& where) {
  if (field.empty()) throw Error(ErrorKind::Parse, "empty field at " + where);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw Error(ErrorKind::Parse, "cannot parse '" + field + "' as a number at " + where);
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFinite, "non-finite value '" + field + "' at " + where);
  }
  return v;
}

long long parse_integer(const std::string& field, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE) {
    throw Error(ErrorKind::Parse, "cannot parse '" + field + "' as an integer at " + where);
  }
  return v;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_double(fields[c], path.string() + " row " +
                                                std::to_string(rows.size()) + " column " +
                                                std::to_string(c)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  path.string() + " line " + std::to_string(lineno) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(rows.size());
  const Index p = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Eigen::MatrixXd m(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

DomainTable load_domain_table(const std::filesystem::path& path, Index domain,
                              const DomainLayout& layout) {
  if (domain < 0 || domain >= layout.domains()) {
    throw Error(ErrorKind::OutOfRange, "unknown domain " + std::to_string(domain));
  }
  Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.rows() != layout.items(domain) || m.cols() != layout.features(domain)) {
    throw Error(ErrorKind::DimensionMismatch,
                path.string() + ": expected " + std::to_string(layout.items(domain)) + "x" +
                    std::to_string(layout.features(domain)) + ", found " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  return DomainTable{domain, std::move(m), std::nullopt};
}

void write_domain_table(const std::filesystem::path& path, const DomainTable& table) {
  auto out = open_output(path);
  for (Index i = 0; i < table.data.rows(); ++i) {
    for (Index j = 0; j < table.data.cols(); ++j) {
      if (j) out << ',';
      out << format_double(table.data(i, j));
    }
    out << '\n';
  }
}

WeightGraph load_weights(const std::filesystem::path& path, const DomainLayout& layout) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Parse, path.string() + " is empty; expected a header line");
  }
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected{"domain_a", "index_a", "domain_b", "index_b", "weight"};
  if (header != expected) {
    throw Error(ErrorKind::Parse,
                path.string() + ": header must be domain_a,index_a,domain_b,index_b,weight");
  }
  std::vector<WeightEntry> entries;
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + " line " + std::to_string(lineno);
    if (f.size() != 5) {
      throw Error(ErrorKind::Parse, where + ": expected 5 fields, found " + std::to_string(f.size()));
    }
    entries.push_back({parse_integer(f[0], where), parse_integer(f[1], where),
                       parse_integer(f[2], where), parse_integer(f[3], where),
                       parse_double(f[4], where)});
  }
  return WeightGraph::from_entries(layout, entries);
}

void write_weights(const std::filesystem::path& path, const WeightGraph& graph) {
  auto out = open_output(path);
  out << "domain_a,index_a,domain_b,index_b,weight\n";
  for (Index k = 0; k < graph.edge_count(); ++k) {
    const auto e = graph.entry(k);
    out << e.domain_a << ',' << e.index_a << ',' << e.domain_b << ',' << e.index_b << ','
        << format_double(e.weight) << '\n';
  }
}

}  // namespace cdmca
