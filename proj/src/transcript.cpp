#include "normip/transcript.hpp"

#include <algorithm>
#include <bit>
#include <cfenv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace normip {

const char* to_string(Party p) { return p == Party::alice ? "alice" : "bob"; }

unsigned bits_for(std::uint64_t count) {
  if (count <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(count - 1));
}

void BitWriter::write(std::uint64_t value, unsigned width) {
  if (width > 64) throw std::invalid_argument("BitWriter: width > 64");
  if (width < 64 && (value >> width) != 0) throw std::invalid_argument("BitWriter: value does not fit");
  for (unsigned b = width; b-- > 0;) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> b) & 1U) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
    ++bits_;
  }
}

std::uint64_t BitReader::read(unsigned width) {
  if (width > remaining()) throw std::out_of_range("BitReader: read past end");
  std::uint64_t v = 0;
  for (unsigned b = 0; b < width; ++b, ++pos_) {
    const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U;
    v = (v << 1) | (bit ? 1U : 0U);
  }
  return v;
}

void Transcript::append(Message m) {
  total_bits_ += m.bits;
  messages_.push_back(std::move(m));
}

void Transcript::append(const Transcript& other) {
  for (const auto& m : other.messages_) append(m);
}

bool Transcript::single_sender() const {
  for (const auto& m : messages_)
    if (m.sender != messages_.front().sender) return false;
  return true;
}

Transcript Transcript::swapped() const {
  Transcript t;
  for (auto m : messages_) {
    m.sender = other(m.sender);
    t.append(std::move(m));
  }
  return t;
}

std::string Transcript::to_debug() const {
  std::ostringstream os;
  static const char* hex = "0123456789abcdef";
  for (const auto& m : messages_) {
    os << to_string(m.sender) << ' ' << m.bits << ' ';
    if (m.payload.empty()) os << '-';
    for (auto byte : m.payload) os << hex[byte >> 4] << hex[byte & 15];
    os << ' ' << (m.label.empty() ? "-" : m.label) << '\n';
  }
  return os.str();
}

bool Transcript::operator==(const Transcript& o) const {
  if (total_bits_ != o.total_bits_ || messages_.size() != o.messages_.size()) return false;
  for (std::size_t i = 0; i < messages_.size(); ++i) {
    const auto& a = messages_[i];
    const auto& b = o.messages_[i];
    if (a.sender != b.sender || a.bits != b.bits || a.payload != b.payload || a.label != b.label) return false;
  }
  return true;
}

Quantizer::Quantizer(std::size_t n, double eps, std::size_t max_terms) {
  if (n == 0) throw std::invalid_argument("Quantizer: n must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("Quantizer: eps must be positive");
  const double terms = static_cast<double>(std::max<std::size_t>(max_terms, 1));
  const double nn = static_cast<double>(n);
  step_ = eps / (4.0 * terms * nn);
  bound_ = nn / eps;
  const double levels = std::floor(bound_ / step_);
  if (!(levels < 4.0e18)) throw std::invalid_argument("Quantizer: grid too fine for 64-bit codes");
  max_level_ = static_cast<std::int64_t>(levels);
  value_bits_ = bits_for(2 * static_cast<std::uint64_t>(max_level_) + 1);
}

Quantizer::Code Quantizer::quantize(double x) const {
  if (!std::isfinite(x) || std::abs(x) > bound_) throw std::out_of_range("quantize: value outside the grid range");
  bool unused = false;
  return quantize_saturating(x, unused);
}

Quantizer::Code Quantizer::quantize_saturating(double x, bool& saturated) const {
  saturated = false;
  if (x > bound_) {
    x = bound_;
    saturated = true;
  } else if (x < -bound_) {
    x = -bound_;
    saturated = true;
  }
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  auto level = static_cast<std::int64_t>(std::nearbyint(x / step_));
  level = std::clamp(level, -max_level_, max_level_);
  const auto code = static_cast<std::uint64_t>(level + max_level_);
  return {code, dequantize(code)};
}

double Quantizer::dequantize(std::uint64_t code) const {
  const auto level = static_cast<std::int64_t>(code) - max_level_;
  return static_cast<double>(level) * step_;
}

QuantizedValue quantize_value(double x, std::size_t n, double eps, std::size_t max_terms) {
  const Quantizer q(n, eps, max_terms);
  const auto c = q.quantize(x);
  return {c.code, c.value, q.value_bits()};
}

}  // namespace normip
