#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace crl::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
std::string format_vector(const Eigen::VectorXd& v, char sep = ' ');

double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_u64(std::string_view s);
bool parse_bool(std::string_view s);
Eigen::VectorXd parse_vector(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Ordered `key = value` lines; `#` starts a comment line.
/// Duplicate keys are a ParseError.
std::map<std::string, std::string> parse_key_values(const std::string& body);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& body);

}  // namespace crl::text
