#pragma once

#include <span>
#include <string>

#include "normip/vector.hpp"

namespace normip {

/// Values separated by commas, whitespace or newlines. Empty cells are
/// rejected.
Vector parse_vector_csv(const std::string& text);
std::string format_vector_csv(std::span<const double> v);

Vector read_vector_csv(const std::string& path);
void write_vector_csv(const std::string& path, std::span<const double> v);

/// Little-endian: uint64 count, then count IEEE-754 doubles.
Vector read_vector_binary(const std::string& path);
void write_vector_binary(const std::string& path, std::span<const double> v);

/// Binary for ".bin" and ".f64", CSV otherwise.
Vector read_vector(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace normip
