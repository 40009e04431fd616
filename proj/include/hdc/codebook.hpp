#pragma once

// Feature schema and the item memory built from it: one base vector per
// feature, a bit-flip chain of level vectors per continuous feature, and an
// independent random vector per category value.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hdc/error.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/random.hpp"

namespace hdc {

enum class FeatureKind : std::uint8_t { Continuous = 0, Categorical = 1 };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  double min = 0.0;
  double max = 0.0;
  // Bin over log1p(max(x, 0)) instead of x. Continuous only.
  bool log_scale = false;
  std::vector<std::string> vocabulary;

  static FeatureSpec continuous(std::string name, double min, double max, bool log_scale = false) {
    FeatureSpec spec;
    spec.name = std::move(name);
    spec.kind = FeatureKind::Continuous;
    spec.min = min;
    spec.max = max;
    spec.log_scale = log_scale;
    return spec;
  }

  static FeatureSpec categorical(std::string name, std::vector<std::string> vocabulary) {
    FeatureSpec spec;
    spec.name = std::move(name);
    spec.kind = FeatureKind::Categorical;
    spec.vocabulary = std::move(vocabulary);
    return spec;
  }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct FeatureSchema {
  std::vector<FeatureSpec> features;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return features.size(); }

  void validate() const {
    if (features.empty()) throw Error(ErrorKind::InvalidConfiguration, "schema has no features");
    std::unordered_set<std::string> names;
    for (const auto& f : features) {
      if (!names.insert(f.name).second)
        throw Error(ErrorKind::InvalidConfiguration, "duplicate feature name '" + f.name + "'");
      if (f.kind == FeatureKind::Continuous) {
        if (!(f.min <= f.max))
          throw Error(ErrorKind::InvalidConfiguration, "feature '" + f.name + "' has min > max");
      } else {
        if (f.vocabulary.empty())
          throw Error(ErrorKind::InvalidConfiguration, "feature '" + f.name + "' has an empty vocabulary");
        std::unordered_set<std::string> seen(f.vocabulary.begin(), f.vocabulary.end());
        if (seen.size() != f.vocabulary.size())
          throw Error(ErrorKind::InvalidConfiguration, "feature '" + f.name + "' has duplicate categories");
      }
    }
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

// A raw feature value: numeric for continuous features, text for categories.
using FeatureValue = std::variant<double, std::string>;
using PreparedRecord = std::vector<FeatureValue>;

inline double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw Error(ErrorKind::Parse, std::string(what) + ": '" + std::string(text) + "' is not a number");
  return value;
}

// 1-based uniform-width bin of value over [min, max]. Out-of-range values
// clamp to the edge bins; a zero-width range always yields bin 1.
inline std::size_t level_index(double value, const FeatureSpec& spec, std::size_t bins) {
  double lo = spec.min;
  double hi = spec.max;
  if (spec.log_scale) {
    const auto squash = [](double x) { return std::log1p(std::max(x, 0.0)); };
    value = squash(value);
    lo = squash(lo);
    hi = squash(hi);
  }
  if (bins <= 1 || !(hi > lo) || std::isnan(value) || value < lo) return 1;
  if (value >= hi) return bins;
  const double width = (hi - lo) / static_cast<double>(bins);
  const auto index = static_cast<std::size_t>(std::floor((value - lo) / width)) + 1;
  return std::clamp<std::size_t>(index, 1, bins);
}

struct Codebook {
  std::size_t dim = 0;
  std::size_t bins = 0;
  std::uint64_t seed = 0;
  std::vector<Hypervector> base;
  // levels[j] holds L_1..L_K for continuous feature j, empty otherwise.
  std::vector<std::vector<Hypervector>> levels;
  // categories[j][v] is the code of schema.features[j].vocabulary[v].
  std::vector<std::vector<Hypervector>> categories;
  Hypervector oov;

  friend bool operator==(const Codebook& a, const Codebook& b) {
    return a.dim == b.dim && a.bins == b.bins && a.seed == b.seed && a.base == b.base &&
           a.levels == b.levels && a.categories == b.categories && a.oov == b.oov;
  }
};

// Sub-stream tags. Every vector is keyed by feature name (and category
// value), so changing one feature leaves every other code untouched.
namespace stream {
inline constexpr std::string_view kBase = "base";
inline constexpr std::string_view kLevel = "level";
inline constexpr std::string_view kCategory = "category";
inline constexpr std::string_view kOov = "oov";

inline std::string category_key(const std::string& feature, const std::string& value) {
  return feature + '\x1f' + value;
}
}  // namespace stream

inline Codebook build_codebook(const FeatureSchema& schema, std::size_t dim, std::size_t bins,
                               std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorKind::InvalidDimension, "codebook dimension must be >= 1");
  if (bins == 0 || bins > dim)
    throw Error(ErrorKind::InvalidConfiguration,
                "bins must satisfy 1 <= bins <= dim (bins=" + std::to_string(bins) +
                    ", dim=" + std::to_string(dim) + ")");
  schema.validate();

  const RandomSource master(seed);
  Codebook book;
  book.dim = dim;
  book.bins = bins;
  book.seed = seed;
  book.base.reserve(schema.size());
  book.levels.resize(schema.size());
  book.categories.resize(schema.size());

  const std::size_t flips = dim / bins;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& spec = schema.features[j];
    auto base_rng = master.fork(stream::kBase, spec.name);
    book.base.push_back(random_hv(dim, base_rng));

    if (spec.kind == FeatureKind::Continuous) {
      auto level_rng = master.fork(stream::kLevel, spec.name);
      auto& chain = book.levels[j];
      chain.reserve(bins);
      chain.push_back(random_hv(dim, level_rng));
      for (std::size_t i = 1; i < bins; ++i) chain.push_back(flip_bits(chain.back(), flips, level_rng));
    } else {
      auto& codes = book.categories[j];
      codes.reserve(spec.vocabulary.size());
      for (const auto& value : spec.vocabulary) {
        auto rng = master.fork(stream::kCategory, stream::category_key(spec.name, value));
        codes.push_back(random_hv(dim, rng));
      }
    }
  }
  auto oov_rng = master.fork(stream::kOov);
  book.oov = random_hv(dim, oov_rng);
  return book;
}

// Category value -> vocabulary index, per categorical feature.
class CategoryIndex {
 public:
  CategoryIndex() = default;

  explicit CategoryIndex(const FeatureSchema& schema) : maps_(schema.size()) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& vocab = schema.features[j].vocabulary;
      for (std::size_t v = 0; v < vocab.size(); ++v) maps_[j].emplace(vocab[v], v);
    }
  }

  // Vocabulary index or -1 when the value was not seen in training.
  std::ptrdiff_t find(std::size_t feature, const std::string& value) const {
    const auto& map = maps_[feature];
    const auto it = map.find(value);
    return it == map.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }

 private:
  std::vector<std::unordered_map<std::string, std::size_t>> maps_;
};

namespace detail {

inline std::string format_category(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 1e15)
    return std::to_string(static_cast<long long>(value));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

inline const Hypervector& lookup_level(std::size_t feature_index, const FeatureValue& value,
                                       const Codebook& codebook, const FeatureSchema& schema,
                                       const CategoryIndex* index) {
  if (feature_index >= schema.size() || feature_index >= codebook.base.size())
    throw Error(ErrorKind::InvalidArgument, "feature index " + std::to_string(feature_index) + " out of range");
  const auto& spec = schema.features[feature_index];
  if (spec.kind == FeatureKind::Continuous) {
    const double x = std::holds_alternative<double>(value)
                         ? std::get<double>(value)
                         : parse_number(std::get<std::string>(value), spec.name);
    return codebook.levels[feature_index][level_index(x, spec, codebook.bins) - 1];
  }
  const std::string text = std::holds_alternative<std::string>(value)
                               ? std::get<std::string>(value)
                               : format_category(std::get<double>(value));
  std::ptrdiff_t v = -1;
  if (index != nullptr) {
    v = index->find(feature_index, text);
  } else {
    const auto& vocab = spec.vocabulary;
    const auto it = std::find(vocab.begin(), vocab.end(), text);
    if (it != vocab.end()) v = it - vocab.begin();
  }
  return v < 0 ? codebook.oov : codebook.categories[feature_index][static_cast<std::size_t>(v)];
}

}  // namespace detail

// Value code for feature `feature_index`. Unseen categories map to the OOV code.
inline const Hypervector& lookup_level(std::size_t feature_index, const FeatureValue& value,
                                       const Codebook& codebook, const FeatureSchema& schema) {
  return detail::lookup_level(feature_index, value, codebook, schema, nullptr);
}

}  // namespace hdc
