#pragma once

// Random mixed schemas and records for kernel-level tests.

#include <string>
#include <vector>

#include "hdc/codebook.hpp"
#include "hdc/random.hpp"

namespace hdc::testing {

// n features; every third one categorical with a small vocabulary.
inline FeatureSchema random_schema(std::size_t n) {
  FeatureSchema schema;
  for (std::size_t j = 0; j < n; ++j) {
    const std::string name = "f" + std::to_string(j);
    if (j % 3 == 1)
      schema.features.push_back(FeatureSpec::categorical(name, {"a", "b", "c", "d"}));
    else
      schema.features.push_back(FeatureSpec::continuous(name, 0.0, 100.0));
  }
  schema.class_names = {"c0", "c1", "c2", "c3", "c4"};
  return schema;
}

// Values cover out-of-range numbers and unseen categories as well.
inline PreparedRecord random_record(const FeatureSchema& schema, RandomSource& rng) {
  PreparedRecord record;
  for (const auto& f : schema.features) {
    if (f.kind == FeatureKind::Categorical) {
      static const char* const values[] = {"a", "b", "c", "d", "unseen"};
      record.emplace_back(std::string(values[rng.below(5)]));
    } else {
      record.emplace_back(-10.0 + static_cast<double>(rng.below(12000)) / 100.0);
    }
  }
  return record;
}

}  // namespace hdc::testing
