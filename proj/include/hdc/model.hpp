#pragma once

// Class representatives, cosine inference, miss/match retraining and the
// binary model file.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hdc/codebook.hpp"
#include "hdc/dataset.hpp"
#include "hdc/encoding.hpp"
#include "hdc/error.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/io.hpp"
#include "hdc/parallel.hpp"
#include "hdc/random.hpp"

namespace hdc {

struct Hyperparams {
  std::size_t dim = 10000;
  std::size_t bins = 10;
  // Binarization threshold; NaN means "half the feature count".
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double learning_rate = 1.0;
  std::size_t iterations = 50;
  std::uint64_t seed = kDefaultSeed;

  double resolved_threshold(std::size_t feature_count) const {
    return std::isnan(threshold) ? default_threshold(feature_count) : threshold;
  }

  friend bool operator==(const Hyperparams& a, const Hyperparams& b) {
    const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.dim == b.dim && a.bins == b.bins && same(a.threshold, b.threshold) &&
           a.learning_rate == b.learning_rate && a.iterations == b.iterations && a.seed == b.seed;
  }
};

struct ClassModel {
  // threshold is stored resolved.
  Hyperparams hyperparams;
  FeatureSchema schema;
  LabelMap label_map;
  Codebook codebook;
  std::vector<AccumulatorVector> representatives;

  std::size_t num_classes() const noexcept { return representatives.size(); }

  Encoder encoder() const { return Encoder(codebook, schema, hyperparams.threshold); }

  void validate() const {
    if (representatives.size() != schema.class_names.size())
      throw Error(ErrorKind::InvalidConfiguration, "representative count does not match class count");
    for (const auto& r : representatives)
      if (r.dim() != hyperparams.dim)
        throw Error(ErrorKind::InvalidConfiguration, "representative dimension does not match model");
    if (codebook.dim != hyperparams.dim || codebook.base.size() != schema.size())
      throw Error(ErrorKind::InvalidConfiguration, "codebook does not match schema/hyperparameters");
  }

  friend bool operator==(const ClassModel&, const ClassModel&) = default;
};

struct Prediction {
  std::size_t class_index = 0;
  std::vector<double> similarities;
  bool degenerate = false;
};

inline std::vector<double> squared_norms(std::span<const AccumulatorVector> representatives) {
  std::vector<double> out;
  out.reserve(representatives.size());
  for (const auto& r : representatives) out.push_back(r.squared_norm());
  return out;
}

// Argmax of cosine similarity; ties go to the lowest class index.
inline Prediction predict(const Hypervector& h, std::span<const AccumulatorVector> representatives,
                          std::span<const double> norms) {
  Prediction p;
  p.similarities.reserve(representatives.size());
  for (std::size_t c = 0; c < representatives.size(); ++c) {
    const auto s = cosine(h, representatives[c], norms[c]);
    p.degenerate = p.degenerate || s.degenerate;
    p.similarities.push_back(s.value);
    if (s.value > p.similarities[p.class_index]) p.class_index = c;
  }
  return p;
}

inline Prediction predict(const Hypervector& h, const ClassModel& model) {
  if (h.dim() != model.hyperparams.dim)
    throw Error(ErrorKind::InvalidArgument, "query dimension " + std::to_string(h.dim()) +
                                                " does not match model dimension " +
                                                std::to_string(model.hyperparams.dim));
  const auto norms = squared_norms(model.representatives);
  return predict(h, model.representatives, norms);
}

inline std::vector<Prediction> predict_batch(std::span<const Hypervector> queries, const ClassModel& model,
                                             std::size_t workers = 1) {
  const auto norms = squared_norms(model.representatives);
  std::vector<Prediction> out(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t i) {
    if (queries[i].dim() != model.hyperparams.dim)
      throw Error(ErrorKind::InvalidArgument, "query dimension does not match model");
    out[i] = predict(queries[i], model.representatives, norms);
  });
  return out;
}

// C_c = sum of H_bin over the samples of class c. A class without samples
// keeps the zero vector and is reported in `warnings`.
inline std::vector<AccumulatorVector> train_initial(std::span<const Hypervector> encoded,
                                                    std::span<const std::size_t> labels, std::size_t num_classes,
                                                    std::vector<std::string>* warnings = nullptr) {
  if (encoded.empty()) throw Error(ErrorKind::InvalidArgument, "training set is empty");
  if (labels.size() != encoded.size())
    throw Error(ErrorKind::InvalidArgument, "label count does not match sample count");
  if (num_classes == 0) throw Error(ErrorKind::InvalidArgument, "need at least one class");
  const std::size_t dim = encoded.front().dim();
  std::vector<AccumulatorVector> reps(num_classes, AccumulatorVector(dim));
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (labels[i] >= num_classes)
      throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(labels[i]) + " out of range");
    accumulate(reps[labels[i]], encoded[i], 1.0);
    ++counts[labels[i]];
  }
  if (warnings != nullptr)
    for (std::size_t c = 0; c < num_classes; ++c)
      if (counts[c] == 0)
        warnings->push_back("class " + std::to_string(c) + " has no training samples; representative is zero");
  return reps;
}

inline std::vector<AccumulatorVector> train_initial(const std::vector<EncodedRecord>& encoded, std::size_t num_classes,
                                                    std::vector<std::string>* warnings = nullptr) {
  std::vector<Hypervector> bits;
  std::vector<std::size_t> labels;
  bits.reserve(encoded.size());
  labels.reserve(encoded.size());
  for (const auto& e : encoded) {
    if (!e.label) throw Error(ErrorKind::InvalidArgument, "training sample without a label");
    bits.push_back(e.binary);
    labels.push_back(*e.label);
  }
  return train_initial(bits, labels, num_classes, warnings);
}

struct EpochStats {
  std::size_t epoch = 0;
  // Share of samples classified correctly while the epoch ran (before each
  // sample's own update).
  double accuracy = 0.0;
  std::size_t updates = 0;
};

struct RetrainResult {
  std::vector<EpochStats> trace;
  // True when an epoch made no updates.
  bool converged = false;
};

// Online miss/match refinement. Samples are visited in one seeded order kept
// for every epoch; each misclassified sample moves alpha*H from the predicted
// representative to the true one. Stops early after an update-free epoch.
inline RetrainResult retrain(std::vector<AccumulatorVector>& representatives, std::span<const Hypervector> encoded,
                             std::span<const std::size_t> labels, double alpha, std::size_t iterations,
                             std::uint64_t seed) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be > 0");
  if (labels.size() != encoded.size())
    throw Error(ErrorKind::InvalidArgument, "label count does not match sample count");
  if (representatives.empty()) throw Error(ErrorKind::InvalidArgument, "model has no representatives");

  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomSource rng = RandomSource(seed).fork("retrain-order");
  shuffle(order.begin(), order.end(), rng);

  auto norms = squared_norms(representatives);
  RetrainResult result;
  for (std::size_t epoch = 1; epoch <= iterations; ++epoch) {
    std::size_t correct = 0;
    std::size_t updates = 0;
    for (const auto i : order) {
      const auto& h = encoded[i];
      const auto truth = labels[i];
      if (truth >= representatives.size()) throw Error(ErrorKind::InvalidArgument, "label out of range");
      const auto guess = predict(h, representatives, norms).class_index;
      if (guess == truth) {
        ++correct;
        continue;
      }
      accumulate(representatives[guess], h, -alpha);
      accumulate(representatives[truth], h, alpha);
      norms[guess] = representatives[guess].squared_norm();
      norms[truth] = representatives[truth].squared_norm();
      ++updates;
    }
    const double accuracy =
        encoded.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(encoded.size());
    result.trace.push_back({epoch, accuracy, updates});
    if (updates == 0) {
      result.converged = true;
      break;
    }
  }
  return result;
}

inline RetrainResult retrain(ClassModel& model, std::span<const Hypervector> encoded,
                             std::span<const std::size_t> labels, double alpha, std::size_t iterations) {
  return retrain(model.representatives, encoded, labels, alpha, iterations, model.hyperparams.seed);
}

// ---------------------------------------------------------------------------
// Model file. Layout (all integers little-endian, doubles as IEEE-754 bits):
//
//   "HDCMODEL"  u32 major  u32 minor  payload  u64 fnv1a(everything before)
//
// The payload is documented in docs/model_format.md.

inline constexpr std::string_view kModelMagic = "HDCMODEL";
inline constexpr std::uint32_t kModelFormatMajor = 1;
inline constexpr std::uint32_t kModelFormatMinor = 0;

namespace detail {

inline void write_hv(ByteWriter& w, const Hypervector& hv) {
  for (Word word : hv.words()) w.u64(word);
}

inline Hypervector read_hv(ByteReader& r, std::size_t dim) {
  std::vector<Word> words(words_for(dim));
  for (auto& word : words) word = r.u64();
  Hypervector hv = Hypervector::from_words(dim, words);
  if (hv.words().back() != words.back()) throw Error(ErrorKind::CorruptModel, "stray bits past dimension");
  return hv;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const ClassModel& model) {
  model.validate();
  ByteWriter w;
  w.raw(kModelMagic);
  w.u32(kModelFormatMajor);
  w.u32(kModelFormatMinor);

  const auto& hp = model.hyperparams;
  w.u64(hp.dim);
  w.u64(hp.bins);
  w.f64(hp.threshold);
  w.f64(hp.learning_rate);
  w.u64(hp.iterations);
  w.u64(hp.seed);

  w.u64(model.schema.features.size());
  for (const auto& f : model.schema.features) {
    w.str(f.name);
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.f64(f.min);
    w.f64(f.max);
    w.u8(f.log_scale ? 1 : 0);
    w.u64(f.vocabulary.size());
    for (const auto& v : f.vocabulary) w.str(v);
  }
  w.u64(model.schema.class_names.size());
  for (const auto& c : model.schema.class_names) w.str(c);

  const auto& lm = model.label_map;
  w.u64(lm.class_names.size());
  for (const auto& c : lm.class_names) w.str(c);
  w.u8(static_cast<std::uint8_t>(lm.policy));
  w.u64(lm.fallback);
  w.u64(lm.raw_to_class.size());
  for (const auto& [raw, cls] : lm.raw_to_class) {
    w.str(raw);
    w.u64(cls);
  }

  const auto& cb = model.codebook;
  w.u64(cb.dim);
  w.u64(cb.bins);
  w.u64(cb.seed);
  for (std::size_t j = 0; j < cb.base.size(); ++j) {
    detail::write_hv(w, cb.base[j]);
    w.u64(cb.levels[j].size());
    for (const auto& hv : cb.levels[j]) detail::write_hv(w, hv);
    w.u64(cb.categories[j].size());
    for (const auto& hv : cb.categories[j]) detail::write_hv(w, hv);
  }
  detail::write_hv(w, cb.oov);

  w.u64(model.representatives.size());
  for (const auto& rep : model.representatives)
    for (double v : rep.values()) w.f64(v);

  w.u64(checksum(w.bytes()));
  return std::move(w.bytes());
}

inline ClassModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kModelMagic.size() + 16) throw Error(ErrorKind::CorruptModel, "file too short");
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader tail(bytes.last(8));
  if (tail.u64() != checksum(body)) throw Error(ErrorKind::CorruptModel, "checksum mismatch");

  ByteReader r(body);
  if (r.raw(kModelMagic.size()) != kModelMagic) throw Error(ErrorKind::CorruptModel, "bad magic bytes");
  const auto major = r.u32();
  const auto minor = r.u32();
  if (major != kModelFormatMajor)
    throw Error(ErrorKind::CorruptModel, "unsupported format version " + std::to_string(major) + "." +
                                             std::to_string(minor));

  ClassModel model;
  auto& hp = model.hyperparams;
  hp.dim = r.u64();
  hp.bins = r.u64();
  hp.threshold = r.f64();
  hp.learning_rate = r.f64();
  hp.iterations = r.u64();
  hp.seed = r.u64();
  if (hp.dim == 0 || hp.bins == 0 || hp.bins > hp.dim)
    throw Error(ErrorKind::CorruptModel, "invalid dimension or bin count");

  const auto n_features = r.count(8);
  model.schema.features.resize(n_features);
  for (auto& f : model.schema.features) {
    f.name = r.str();
    const auto kind = r.u8();
    if (kind > 1) throw Error(ErrorKind::CorruptModel, "invalid feature kind");
    f.kind = static_cast<FeatureKind>(kind);
    f.min = r.f64();
    f.max = r.f64();
    f.log_scale = r.u8() != 0;
    f.vocabulary.resize(r.count(8));
    for (auto& v : f.vocabulary) v = r.str();
  }
  model.schema.class_names.resize(r.count(8));
  for (auto& c : model.schema.class_names) c = r.str();

  auto& lm = model.label_map;
  lm.class_names.resize(r.count(8));
  for (auto& c : lm.class_names) c = r.str();
  const auto policy = r.u8();
  if (policy > 1) throw Error(ErrorKind::CorruptModel, "invalid label policy");
  lm.policy = static_cast<UnknownLabelPolicy>(policy);
  lm.fallback = r.u64();
  const auto n_labels = r.count(16);
  for (std::size_t i = 0; i < n_labels; ++i) {
    auto raw = r.str();
    lm.raw_to_class[raw] = r.u64();
  }

  auto& cb = model.codebook;
  cb.dim = r.u64();
  cb.bins = r.u64();
  cb.seed = r.u64();
  if (cb.dim != hp.dim) throw Error(ErrorKind::CorruptModel, "codebook dimension mismatch");
  const std::size_t hv_bytes = words_for(cb.dim) * 8;
  cb.levels.resize(n_features);
  cb.categories.resize(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    cb.base.push_back(detail::read_hv(r, cb.dim));
    cb.levels[j].resize(r.count(hv_bytes));
    for (auto& hv : cb.levels[j]) hv = detail::read_hv(r, cb.dim);
    cb.categories[j].resize(r.count(hv_bytes));
    for (auto& hv : cb.categories[j]) hv = detail::read_hv(r, cb.dim);
  }
  cb.oov = detail::read_hv(r, cb.dim);

  const auto n_reps = r.count(hp.dim * 8);
  for (std::size_t c = 0; c < n_reps; ++c) {
    std::vector<double> values(hp.dim);
    for (auto& v : values) v = r.f64();
    model.representatives.emplace_back(std::move(values));
  }
  if (r.remaining() != 0) throw Error(ErrorKind::CorruptModel, "trailing bytes after representatives");

  try {
    model.schema.validate();
    model.validate();
    for (std::size_t j = 0; j < n_features; ++j) {
      const auto& f = model.schema.features[j];
      const bool ok = f.kind == FeatureKind::Continuous
                          ? cb.levels[j].size() == cb.bins && cb.categories[j].empty()
                          : cb.levels[j].empty() && cb.categories[j].size() == f.vocabulary.size();
      if (!ok) throw Error(ErrorKind::CorruptModel, "codebook layout does not match feature '" + f.name + "'");
    }
    if (lm.fallback >= lm.class_names.size() && !lm.class_names.empty())
      throw Error(ErrorKind::CorruptModel, "label fallback out of range");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptModel) throw;
    throw Error(ErrorKind::CorruptModel, e.what());
  }
  return model;
}

inline void save_model(const ClassModel& model, const std::string& path) {
  write_file_atomic(path, serialize_model(model));
}

inline ClassModel load_model(const std::string& path) { return deserialize_model(read_file(path)); }

}  // namespace hdc
