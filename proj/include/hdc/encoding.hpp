#pragma once

// Record encoding: H = sum_j (B_j xor L_j), then H_bin[i] = H[i] > T.
//
// The binary path never materializes H. Per 64-bit word it keeps a
// bit-sliced counter (plane p holds bit p of every coordinate's count),
// adds the N bound words with a ripple carry and then compares the counter
// against the threshold across all 64 lanes at once.

#include <bit>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdc/codebook.hpp"
#include "hdc/error.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/parallel.hpp"

namespace hdc {

struct EncodedRecord {
  AccumulatorVector sum;
  Hypervector binary;
  std::optional<std::size_t> label;
};

// Half the feature count; strict comparison means a half-integer threshold
// can never tie with an integer sum.
inline double default_threshold(std::size_t feature_count) {
  return static_cast<double>(feature_count) / 2.0;
}

inline Hypervector binarize(const AccumulatorVector& sum, double threshold) {
  Hypervector out(sum.dim());
  const auto values = sum.values();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] > threshold) out.set(i, true);
  return out;
}

// Binds a prepared record against one codebook. Holds references; the
// codebook and schema must outlive the encoder.
class Encoder {
 public:
  Encoder(const Codebook& codebook, const FeatureSchema& schema, double threshold)
      : codebook_(&codebook), schema_(&schema), index_(schema), threshold_(threshold) {
    if (codebook.base.size() != schema.size())
      throw Error(ErrorKind::InvalidConfiguration, "codebook and schema feature counts differ");
    planes_ = static_cast<std::size_t>(std::bit_width(schema.size()));
  }

  const Codebook& codebook() const noexcept { return *codebook_; }
  const FeatureSchema& schema() const noexcept { return *schema_; }
  double threshold() const noexcept { return threshold_; }
  std::size_t dim() const noexcept { return codebook_->dim; }

  const Hypervector& value_code(std::size_t feature, const FeatureValue& value) const {
    return detail::lookup_level(feature, value, *codebook_, *schema_, &index_);
  }

  AccumulatorVector encode_sum(const PreparedRecord& record) const {
    check_arity(record);
    AccumulatorVector sum(dim());
    for (std::size_t j = 0; j < record.size(); ++j)
      accumulate(sum, bind(codebook_->base[j], value_code(j, record[j])), 1.0);
    return sum;
  }

  Hypervector encode_bits(const PreparedRecord& record) const {
    check_arity(record);
    const std::size_t n = record.size();
    std::vector<const Word*> bases(n);
    std::vector<const Word*> levels(n);
    for (std::size_t j = 0; j < n; ++j) {
      bases[j] = codebook_->base[j].words().data();
      levels[j] = value_code(j, record[j]).words().data();
    }

    const std::uint64_t target = min_count_above_threshold();
    Hypervector out(dim());
    auto words = out.mutable_words();
    if (target > n) return out;

    std::vector<Word> plane(planes_);
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::fill(plane.begin(), plane.end(), Word{0});
      for (std::size_t j = 0; j < n; ++j) {
        Word carry = bases[j][w] ^ levels[j][w];
        for (std::size_t p = 0; p < planes_ && carry != 0; ++p) {
          const Word next = plane[p] & carry;
          plane[p] ^= carry;
          carry = next;
        }
      }
      // count >= target, evaluated from the most significant plane down.
      Word greater = 0;
      Word equal = ~Word{0};
      for (std::size_t p = planes_; p-- > 0;) {
        if ((target >> p) & 1U) {
          equal &= plane[p];
        } else {
          greater |= equal & plane[p];
          equal &= ~plane[p];
        }
      }
      words[w] = greater | equal;
    }
    out.mask_tail();
    return out;
  }

  EncodedRecord encode_binary(const PreparedRecord& record) const {
    EncodedRecord encoded;
    encoded.sum = encode_sum(record);
    encoded.binary = encode_bits(record);
    return encoded;
  }

  std::vector<Hypervector> encode_batch(std::span<const PreparedRecord> records,
                                        std::size_t workers = 1) const {
    std::vector<Hypervector> out(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) { out[i] = encode_bits(records[i]); });
    return out;
  }

 private:
  void check_arity(const PreparedRecord& record) const {
    if (record.size() != schema_->size())
      throw Error(ErrorKind::InvalidRecord, "record has " + std::to_string(record.size()) +
                                                " features, schema expects " +
                                                std::to_string(schema_->size()));
  }

  // Smallest integer count that is strictly greater than the threshold.
  std::uint64_t min_count_above_threshold() const {
    if (std::isnan(threshold_)) return ~std::uint64_t{0};
    if (threshold_ < 0.0) return 0;
    const double next = std::floor(threshold_) + 1.0;
    if (next > 1e18) return ~std::uint64_t{0};
    return static_cast<std::uint64_t>(next);
  }

  const Codebook* codebook_;
  const FeatureSchema* schema_;
  CategoryIndex index_;
  double threshold_;
  std::size_t planes_ = 1;
};

inline AccumulatorVector encode(const PreparedRecord& record, const Codebook& codebook,
                                const FeatureSchema& schema) {
  return Encoder(codebook, schema, default_threshold(schema.size())).encode_sum(record);
}

inline EncodedRecord encode_binary(const PreparedRecord& record, const Codebook& codebook,
                                   const FeatureSchema& schema, double threshold) {
  return Encoder(codebook, schema, threshold).encode_binary(record);
}

}  // namespace hdc
