#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace normip {

enum class Party { alice, bob };

inline Party other(Party p) { return p == Party::alice ? Party::bob : Party::alice; }
const char* to_string(Party p);

/// ceil(log2(count)) for count >= 1; the number of bits needed to name one
/// of `count` items. Exact integer arithmetic.
unsigned bits_for(std::uint64_t count);

/// MSB-first bit packer.
class BitWriter {
public:
  void write(std::uint64_t value, unsigned width);
  std::size_t bits() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
public:
  BitReader(const std::vector<std::uint8_t>& bytes, std::size_t bits) : bytes_(bytes), bits_(bits) {}
  std::uint64_t read(unsigned width);
  std::size_t remaining() const { return bits_ - pos_; }

private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t bits_;
  std::size_t pos_ = 0;
};

struct Message {
  Party sender = Party::alice;
  std::vector<std::uint8_t> payload;
  std::size_t bits = 0;
  std::string label;
};

/// Bit-exact record of one protocol execution.
class Transcript {
public:
  void append(Message m);
  void append(const Transcript& other);
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t total_bits() const { return total_bits_; }
  bool single_sender() const;
  /// Same messages with Alice and Bob exchanged.
  Transcript swapped() const;
  /// One line per message: "<sender> <bits> <hex payload> <label>".
  std::string to_debug() const;
  bool operator==(const Transcript& o) const;

private:
  std::vector<Message> messages_;
  std::size_t total_bits_ = 0;
};

/// Fixed-point grid for transmitted reals: step = eps / (4 D n), symmetric
/// range [-n/eps, n/eps], round-to-nearest with ties to even. Codes are
/// offset-binary in [0, 2L] with L = floor(range / step).
class Quantizer {
public:
  Quantizer(std::size_t n, double eps, std::size_t max_terms);

  double step() const { return step_; }
  double bound() const { return bound_; }
  unsigned value_bits() const { return value_bits_; }

  struct Code {
    std::uint64_t code;
    double value;
  };
  /// Throws std::out_of_range when |x| exceeds the bound.
  Code quantize(double x) const;
  /// Clamps x into range first; `saturated` reports whether that happened.
  Code quantize_saturating(double x, bool& saturated) const;
  double dequantize(std::uint64_t code) const;

private:
  double step_;
  double bound_;
  std::int64_t max_level_;
  unsigned value_bits_;
};

struct QuantizedValue {
  std::uint64_t code;
  double value;
  unsigned bits;
};

QuantizedValue quantize_value(double x, std::size_t n, double eps, std::size_t max_terms);

struct ProtocolOutcome {
  double estimate = 0.0;
  Transcript transcript;
  Party output_party = Party::bob;
  std::size_t sparsity = 0;  // nonzeros sent by the sparsifying party
  std::vector<std::pair<std::string, double>> trace;
};

}  // namespace normip
