#pragma once

// Packed binary hypervectors and the dense accumulators they are bundled
// into. Bits live in 64-bit words, bit i at word i/64, position i%64; the
// unused high bits of the last word are always zero.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdc/error.hpp"
#include "hdc/random.hpp"

namespace hdc {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t dim) noexcept {
  return (dim + kWordBits - 1) / kWordBits;
}

class Hypervector {
 public:
  Hypervector() = default;

  explicit Hypervector(std::size_t dim) : dim_(dim), words_(words_for(dim), 0) {
    if (dim == 0) throw Error(ErrorKind::InvalidDimension, "hypervector dimension must be >= 1");
  }

  // "1010" -> bit0=1, bit1=0, bit2=1, bit3=0.
  static Hypervector from_string(std::string_view bits) {
    Hypervector hv(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1')
        throw Error(ErrorKind::InvalidArgument, "bit string may only contain '0' and '1'");
      hv.set(i, bits[i] == '1');
    }
    return hv;
  }

  static Hypervector from_words(std::size_t dim, std::vector<Word> words) {
    Hypervector hv(dim);
    if (words.size() != hv.words_.size())
      throw Error(ErrorKind::InvalidArgument, "word count does not match dimension");
    hv.words_ = std::move(words);
    hv.mask_tail();
    return hv;
  }

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  std::span<const Word> words() const noexcept { return words_; }
  std::span<Word> mutable_words() noexcept { return words_; }

  bool get(std::size_t i) const noexcept { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }

  void set(std::size_t i, bool value) noexcept {
    const Word mask = Word{1} << (i % kWordBits);
    if (value)
      words_[i / kWordBits] |= mask;
    else
      words_[i / kWordBits] &= ~mask;
  }

  void flip(std::size_t i) noexcept { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool none() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
  }

  Hypervector complement() const {
    Hypervector out = *this;
    for (Word& w : out.words_) w = ~w;
    out.mask_tail();
    return out;
  }

  std::string to_string() const {
    std::string s(dim_, '0');
    for (std::size_t i = 0; i < dim_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  // Clears bits beyond dim in the last word.
  void mask_tail() noexcept {
    const std::size_t rem = dim_ % kWordBits;
    if (rem != 0 && !words_.empty()) words_.back() &= (Word{1} << rem) - 1;
  }

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Word> words_;
};

// Dense signed accumulator. Values are doubles so fractional learning rates
// work; integer-valued updates stay exact up to 2^53.
class AccumulatorVector {
 public:
  AccumulatorVector() = default;

  explicit AccumulatorVector(std::size_t dim) : values_(dim, 0.0) {
    if (dim == 0) throw Error(ErrorKind::InvalidDimension, "accumulator dimension must be >= 1");
  }

  AccumulatorVector(std::initializer_list<double> values) : values_(values) {}

  explicit AccumulatorVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool none() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  double squared_norm() const noexcept {
    return std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0);
  }

  AccumulatorVector scaled(double factor) const {
    AccumulatorVector out = *this;
    for (double& v : out.values_) v *= factor;
    return out;
  }

  friend bool operator==(const AccumulatorVector&, const AccumulatorVector&) = default;

 private:
  std::vector<double> values_;
};

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b, const char* op) {
  if (a != b)
    throw Error(ErrorKind::InvalidArgument, std::string(op) + ": dimension mismatch (" +
                                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

// Calls fn(i) for every set bit index of hv, in ascending order.
template <class Fn>
void for_each_set_bit(const Hypervector& hv, Fn&& fn) {
  const auto words = hv.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    Word bits = words[w];
    const std::size_t base = w * kWordBits;
    while (bits != 0) {
      fn(base + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
}

}  // namespace detail

inline Hypervector random_hv(std::size_t dim, RandomSource& rng) {
  if (dim == 0) throw Error(ErrorKind::InvalidDimension, "random_hv: dimension must be >= 1");
  Hypervector hv(dim);
  for (Word& w : hv.mutable_words()) w = rng.next();
  hv.mask_tail();
  return hv;
}

// Binding: element-wise XOR.
inline Hypervector bind(const Hypervector& a, const Hypervector& b) {
  detail::require_same_dim(a.dim(), b.dim(), "bind");
  Hypervector out = a;
  auto dst = out.mutable_words();
  const auto src = b.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
  return out;
}

inline Hypervector operator^(const Hypervector& a, const Hypervector& b) { return bind(a, b); }

inline std::size_t hamming(const Hypervector& a, const Hypervector& b) {
  detail::require_same_dim(a.dim(), b.dim(), "hamming");
  const auto x = a.words();
  const auto y = b.words();
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += static_cast<std::size_t>(std::popcount(x[i] ^ y[i]));
  return n;
}

// Copy of hv with exactly `count` distinct positions inverted. Positions come
// from a partial Fisher-Yates draw, so no position is picked twice.
inline Hypervector flip_bits(const Hypervector& hv, std::size_t count, RandomSource& rng) {
  if (count > hv.dim())
    throw Error(ErrorKind::InvalidArgument, "flip_bits: count " + std::to_string(count) +
                                                " exceeds dimension " + std::to_string(hv.dim()));
  Hypervector out = hv;
  std::vector<std::uint32_t> positions(hv.dim());
  std::iota(positions.begin(), positions.end(), 0U);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + rng.below(hv.dim() - i);
    std::swap(positions[i], positions[j]);
    out.flip(positions[i]);
  }
  return out;
}

inline double dot(const Hypervector& h, const AccumulatorVector& c) {
  detail::require_same_dim(h.dim(), c.dim(), "dot");
  const auto values = c.values();
  double sum = 0.0;
  detail::for_each_set_bit(h, [&](std::size_t i) { sum += values[i]; });
  return sum;
}

struct Similarity {
  double value = 0.0;
  // Set when either operand was all-zero; value is then 0.
  bool degenerate = false;
};

// Cosine with a precomputed ||c||^2, for callers that keep norms current.
inline Similarity cosine(const Hypervector& h, const AccumulatorVector& c, double c_squared_norm) {
  detail::require_same_dim(h.dim(), c.dim(), "cosine");
  const auto ones = h.popcount();
  if (ones == 0 || c_squared_norm <= 0.0) return {0.0, true};
  const double value = dot(h, c) / (std::sqrt(static_cast<double>(ones)) * std::sqrt(c_squared_norm));
  return {std::clamp(value, -1.0, 1.0), false};
}

inline Similarity cosine(const Hypervector& h, const AccumulatorVector& c) {
  detail::require_same_dim(h.dim(), c.dim(), "cosine");
  return cosine(h, c, c.squared_norm());
}

// acc[i] += weight * h[i], in place.
inline AccumulatorVector& accumulate(AccumulatorVector& acc, const Hypervector& h, double weight) {
  detail::require_same_dim(acc.dim(), h.dim(), "accumulate");
  if (weight == 0.0) return acc;
  auto values = acc.values();
  detail::for_each_set_bit(h, [&](std::size_t i) { values[i] += weight; });
  return acc;
}

}  // namespace hdc
