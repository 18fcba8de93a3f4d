#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cdmca/core.hpp"

namespace cdmca {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
/// Fixed 17 significant digits.
std::string format_double17(double value);

/// Plain CSV without header, one item per line. Dimensions must match
/// layout.items(domain) x layout.features(domain).
DomainTable load_domain_table(const std::filesystem::path& path, Index domain,
                              const DomainLayout& layout);
void write_domain_table(const std::filesystem::path& path, const DomainTable& table);

/// Reads a headerless numeric CSV whose shape defines the table; used to infer
/// the layout before the strict load.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Header `domain_a,index_a,domain_b,index_b,weight`, 0-based ids.
WeightGraph load_weights(const std::filesystem::path& path, const DomainLayout& layout);
void write_weights(const std::filesystem::path& path, const WeightGraph& graph);

std::vector<std::string> split_csv_line(const std::string& line);
double parse_double(const std::string& field, const std::string& where);
long long parse_integer(const std::string& field, const std::string& where);

}  // namespace cdmca
