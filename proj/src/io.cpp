#include "normip/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace normip {
namespace {

bool is_separator(char c) { return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r = (r << 8) | ((x >> (8 * i)) & 0xff);
  return r;
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

}  // namespace

Vector parse_vector_csv(const std::string& text) {
  Vector out;
  std::size_t i = 0;
  bool expect_value = false;
  while (i < text.size()) {
    const char c = text[i];
    if (c == ',') {
      if (expect_value) throw std::runtime_error("csv: empty cell");
      expect_value = true;
      ++i;
      continue;
    }
    if (is_separator(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_separator(text[j])) ++j;
    const std::string cell = text.substr(i, j - i);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) throw std::runtime_error("csv: bad number '" + cell + "'");
    out.push_back(x);
    expect_value = false;
    i = j;
  }
  if (expect_value) throw std::runtime_error("csv: trailing comma");
  require_finite(out, "csv");
  return out;
}

std::string format_vector_csv(std::span<const double> v) {
  std::string out;
  char buf[32];
  for (double x : v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw std::runtime_error("csv: cannot format value");
    out.append(buf, ptr);
    out.push_back('\n');
  }
  return out;
}

Vector read_vector_csv(const std::string& path) { return parse_vector_csv(read_text_file(path)); }

void write_vector_csv(const std::string& path, std::span<const double> v) { write_text_file(path, format_vector_csv(v)); }

Vector read_vector_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t count = 0;
  if (!in.read(reinterpret_cast<char*>(&count), 8)) throw std::runtime_error(path + ": missing length header");
  count = to_little(count);
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  if (size != 8 + 8 * count) throw std::runtime_error(path + ": length header does not match file size");
  in.seekg(8);
  Vector out(count);
  for (auto& x : out) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), 8);
    x = std::bit_cast<double>(to_little(bits));
  }
  if (!in) throw std::runtime_error(path + ": truncated");
  require_finite(out, path.c_str());
  return out;
}

void write_vector_binary(const std::string& path, std::span<const double> v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint64_t count = to_little(v.size());
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (double x : v) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(x));
    out.write(reinterpret_cast<const char*>(&bits), 8);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vector read_vector(const std::string& path) {
  return ends_with(path, ".bin") || ends_with(path, ".f64") ? read_vector_binary(path) : read_vector_csv(path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace normip
