#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "hdc/model.hpp"
#include "hdc/pipeline.hpp"
#include "support/synthetic_kdd.hpp"
#include "support/temp_dir.hpp"

namespace hdc {
namespace {

using Hv = Hypervector;

std::vector<Hv> hvs(std::initializer_list<const char*> bits) {
  std::vector<Hv> out;
  for (const auto* b : bits) out.push_back(Hv::from_string(b));
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no hdc::Error thrown";
  return ErrorKind::InvalidArgument;
}

TEST(TrainInitial, OneSamplePerClass) {
  const auto samples = hvs({"1100", "0011", "1010"});
  const std::vector<std::size_t> labels = {0, 1, 2};
  const auto reps = train_initial(samples, labels, 3);
  EXPECT_EQ(reps[0], (AccumulatorVector{1, 1, 0, 0}));
  EXPECT_EQ(reps[1], (AccumulatorVector{0, 0, 1, 1}));
  EXPECT_EQ(reps[2], (AccumulatorVector{1, 0, 1, 0}));
}

TEST(TrainInitial, DuplicatesScaleButKeepDirection) {
  const auto samples = hvs({"1101", "1101"});
  const std::vector<std::size_t> labels = {0, 0};
  const auto reps = train_initial(samples, labels, 1);
  EXPECT_EQ(reps[0], (AccumulatorVector{2, 2, 0, 2}));
  EXPECT_NEAR(cosine(samples[0], reps[0]).value, 1.0, 1e-15);
}

TEST(TrainInitial, SumsMatchIndependentLoop) {
  const auto samples = hvs({"10110010", "01100111", "11111111", "00000001", "10101010", "01010101", "11001100",
                            "00110011", "10000000", "01111110"});
  const std::vector<std::size_t> labels = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const auto reps = train_initial(samples, labels, 3);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 8; ++i) {
      double expected = 0;
      for (std::size_t s = 0; s < samples.size(); ++s)
        if (labels[s] == c && samples[s].to_string()[i] == '1') expected += 1;
      EXPECT_EQ(reps[c][i], expected) << "class " << c << " coord " << i;
    }
}

TEST(TrainInitial, EncodedRecordOverloadAndErrors) {
  std::vector<EncodedRecord> encoded(2);
  encoded[0].binary = Hv::from_string("1100");
  encoded[0].label = 1;
  encoded[1].binary = Hv::from_string("0110");
  encoded[1].label = 1;
  std::vector<std::string> warnings;
  const auto reps = train_initial(encoded, 3, &warnings);
  EXPECT_EQ(reps[1], (AccumulatorVector{1, 2, 1, 0}));
  EXPECT_TRUE(reps[0].none());
  EXPECT_EQ(warnings.size(), 2u);

  EXPECT_EQ(kind_of([] { train_initial(std::vector<EncodedRecord>{}, 2); }), ErrorKind::InvalidArgument);
  const auto one = hvs({"1"});
  const std::vector<std::size_t> bad = {5};
  EXPECT_EQ(kind_of([&] { train_initial(one, bad, 2); }), ErrorKind::InvalidArgument);
}

TEST(Predict, HandWorkedToyModel) {
  const std::vector<AccumulatorVector> reps = {{1, 1, 1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 1, 1}, {2, 0, 0, 0, 0, 0, 0, 1}};
  const auto norms = squared_norms(reps);
  const auto p = predict(Hv::from_string("11000001"), reps, norms);
  // dots 2, 1, 3; norms sqrt(4), sqrt(4), sqrt(5); |h| = sqrt(3).
  EXPECT_NEAR(p.similarities[0], 2.0 / (2.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(p.similarities[1], 1.0 / (2.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(p.similarities[2], 3.0 / (std::sqrt(5.0) * std::sqrt(3.0)), 1e-15);
  EXPECT_EQ(p.class_index, 2u);
  EXPECT_FALSE(p.degenerate);
}

TEST(Predict, ParallelRepresentativeWins) {
  const std::vector<AccumulatorVector> reps = {{1, 0, 0, 1}, {0, 1, 1, 0}, {3, 3, 0, 0}};
  const auto p = predict(Hv::from_string("1100"), reps, squared_norms(reps));
  EXPECT_EQ(p.class_index, 2u);
  EXPECT_NEAR(p.similarities[2], 1.0, 1e-15);
}

TEST(Predict, AllZeroRepresentativesAreDegenerate) {
  const std::vector<AccumulatorVector> reps(5, AccumulatorVector(4));
  const auto p = predict(Hv::from_string("1010"), reps, squared_norms(reps));
  EXPECT_EQ(p.class_index, 0u);
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.similarities, std::vector<double>(5, 0.0));
}

TEST(Predict, TiesGoToLowestIndex) {
  const std::vector<AccumulatorVector> reps = {{0, 0, 1, 1}, {1, 1, 0, 0}, {2, 2, 0, 0}};
  EXPECT_EQ(predict(Hv::from_string("1100"), reps, squared_norms(reps)).class_index, 1u);
}

TEST(Predict, ArgmaxInvariantUnderPositiveScaling) {
  RandomSource rng(8);
  std::vector<AccumulatorVector> reps;
  for (int c = 0; c < 5; ++c) {
    AccumulatorVector r(256);
    for (std::size_t i = 0; i < 256; ++i) r[i] = static_cast<double>(rng.below(50));
    reps.push_back(r);
  }
  for (int t = 0; t < 200; ++t) {
    const auto h = random_hv(256, rng);
    const auto base = predict(h, reps, squared_norms(reps)).class_index;
    for (std::size_t c = 0; c < 5; ++c)
      for (double s : {0.01, 1.0, 1000.0}) {
        auto scaled = reps;
        scaled[c] = reps[c].scaled(s);
        ASSERT_EQ(predict(h, scaled, squared_norms(scaled)).class_index, base);
      }
  }
}

TEST(Retrain, FixedPointWhenAlreadyCorrect) {
  const auto samples = hvs({"11000000", "00110000", "00001111"});
  const std::vector<std::size_t> labels = {0, 1, 2};
  auto reps = train_initial(samples, labels, 3);
  const auto before = reps;
  const auto result = retrain(reps, samples, labels, 1.0, 50, 1);
  EXPECT_EQ(reps, before);
  ASSERT_EQ(result.trace.size(), 1u);
  EXPECT_EQ(result.trace[0].updates, 0u);
  EXPECT_EQ(result.trace[0].accuracy, 1.0);
  EXPECT_TRUE(result.converged);
}

TEST(Retrain, MissUpdateMovesSampleMass) {
  // The sample (class 1) is closer to class 0's representative.
  const auto sample = Hv::from_string("11110000");
  std::vector<AccumulatorVector> reps = {{5, 5, 5, 5, 0, 0, 0, 0}, {1, 0, 0, 0, 1, 1, 1, 1}};
  const std::vector<Hv> samples = {sample};
  const std::vector<std::size_t> labels = {1};
  const double match_before = dot(sample, reps[1]);
  const double miss_before = dot(sample, reps[0]);
  const auto result = retrain(reps, samples, labels, 1.0, 1, 3);
  ASSERT_EQ(result.trace.size(), 1u);
  EXPECT_EQ(result.trace[0].updates, 1u);
  EXPECT_EQ(dot(sample, reps[1]) - match_before, static_cast<double>(sample.popcount()));
  EXPECT_EQ(miss_before - dot(sample, reps[0]), static_cast<double>(sample.popcount()));
  EXPECT_EQ(reps[1], (AccumulatorVector{2, 1, 1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(reps[0], (AccumulatorVector{4, 4, 4, 4, 0, 0, 0, 0}));
}

TEST(Retrain, DisjointSupportToyReachesFullAccuracy) {
  RandomSource rng(5);
  std::vector<Hv> samples;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 60; ++i) {
    const std::size_t cls = i % 2;
    Hv h(64);
    for (std::size_t b = 0; b < 32; ++b)
      if (rng.below(2)) h.set(cls * 32 + b, true);
    if (h.none()) h.set(cls * 32, true);
    samples.push_back(h);
    labels.push_back(cls);
  }
  auto reps = train_initial(samples, labels, 2);
  const auto result = retrain(reps, samples, labels, 1.0, 50, 9);
  ASSERT_FALSE(result.trace.empty());
  EXPECT_LE(result.trace.size(), 50u);
  EXPECT_EQ(result.trace.back().accuracy, 1.0);
}

TEST(Retrain, OverlappingClassesImproveToFullTrainingAccuracy) {
  // Two noisy prototypes; the minority class starts out mostly misclassified.
  RandomSource rng(12);
  const auto p0 = random_hv(256, rng);
  const auto p1 = flip_bits(p0, 40, rng);
  std::vector<Hv> samples;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 300; ++i) {
    const std::size_t cls = i < 270 ? 0 : 1;
    samples.push_back(flip_bits(cls == 0 ? p0 : p1, 8, rng));
    labels.push_back(cls);
  }
  auto reps = train_initial(samples, labels, 2);
  const auto result = retrain(reps, samples, labels, 1.0, 50, 9);
  EXPECT_EQ(result.trace.back().accuracy, 1.0);
}

TEST(Retrain, ConservesTheSumOfRepresentatives) {
  RandomSource rng(21);
  std::vector<Hv> samples;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 200; ++i) {
    samples.push_back(random_hv(128, rng));
    labels.push_back(rng.below(5));
  }
  auto reps = train_initial(samples, labels, 5);
  const auto total = [&] {
    AccumulatorVector sum(128);
    for (const auto& r : reps)
      for (std::size_t i = 0; i < 128; ++i) sum[i] += r[i];
    return sum;
  };
  const auto before = total();
  std::size_t updates = 0;
  for (int epoch = 0; epoch < 5; ++epoch) {
    const auto result = retrain(reps, samples, labels, 1.0, 1, 100 + epoch);
    updates += result.trace[0].updates;
    ASSERT_EQ(total(), before) << "epoch " << epoch;
  }
  EXPECT_GT(updates, 0u);
  for (const auto& r : reps)
    for (double v : r.values()) ASSERT_EQ(v, std::round(v));
}

TEST(Retrain, RejectsNonPositiveLearningRate) {
  const auto samples = hvs({"10"});
  const std::vector<std::size_t> labels = {0};
  auto reps = train_initial(samples, labels, 1);
  EXPECT_EQ(kind_of([&] { retrain(reps, samples, labels, 0.0, 5, 1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { retrain(reps, samples, labels, -1.0, 5, 1); }), ErrorKind::InvalidArgument);
}

class Persistence : public ::testing::Test {
 protected:
  static TrainOutcome train(std::uint64_t seed, std::size_t dim = 512) {
    TrainOptions options;
    options.hyperparams.dim = dim;
    options.hyperparams.iterations = 5;
    options.hyperparams.seed = seed;
    return train_model(records(), nsl_kdd_label_map(), options);
  }

  static const std::vector<RawRecord>& records() {
    static const auto data = [] {
      testing::SyntheticKdd gen(77);
      std::vector<RawRecord> out;
      std::size_t n = 0;
      for (const auto& l : gen.lines(1000)) out.push_back(*parse_line(l, ++n));
      return out;
    }();
    return data;
  }

  testing::TempDir dir;
};

TEST_F(Persistence, RoundTripIsExact) {
  const auto outcome = train(42);
  const auto path = dir.file("model.hdc");
  save_model(outcome.model, path);
  const auto loaded = load_model(path);
  EXPECT_EQ(loaded, outcome.model);
  EXPECT_EQ(loaded.codebook, outcome.model.codebook);
  EXPECT_EQ(loaded.representatives, outcome.model.representatives);

  const auto a = evaluate_detailed(outcome.model, records());
  const auto b = evaluate_detailed(loaded, records());
  ASSERT_EQ(a.predictions.size(), 1000u);
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    ASSERT_EQ(a.predictions[i].class_index, b.predictions[i].class_index);
    ASSERT_EQ(a.predictions[i].similarities, b.predictions[i].similarities);
  }
}

TEST_F(Persistence, SerializationIsDeterministicAndSeedSensitive) {
  EXPECT_EQ(serialize_model(train(42).model), serialize_model(train(42).model));
  EXPECT_NE(serialize_model(train(42).model), serialize_model(train(43).model));
}

TEST_F(Persistence, TruncatedOrCorruptedFilesAreRejected) {
  const auto bytes = serialize_model(train(1, 128).model);
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(keep));
    EXPECT_EQ(kind_of([&] { deserialize_model(cut); }), ErrorKind::CorruptModel) << keep;
  }
  auto flipped = bytes;
  flipped[bytes.size() / 3] ^= 0x10;
  EXPECT_EQ(kind_of([&] { deserialize_model(flipped); }), ErrorKind::CorruptModel);

  // A future major version is refused even with a valid checksum.
  auto future = bytes;
  future[8] = 2;
  future.resize(future.size() - 8);
  const auto sum = checksum(future);
  for (int i = 0; i < 8; ++i) future.push_back(static_cast<std::uint8_t>(sum >> (8 * i)));
  EXPECT_EQ(kind_of([&] { deserialize_model(future); }), ErrorKind::CorruptModel);

  const auto path = dir.file("truncated.hdc");
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size() / 2));
  }
  EXPECT_EQ(kind_of([&] { load_model(path); }), ErrorKind::CorruptModel);
  EXPECT_EQ(kind_of([&] { load_model(dir.file("missing.hdc")); }), ErrorKind::Io);
}

TEST_F(Persistence, ZeroRetrainingUpdatesMatchesEvaluation) {
  testing::SyntheticKdd gen(3, /*noise=*/0.0);
  std::vector<RawRecord> clean;
  for (const auto& l : gen.lines(300)) clean.push_back(*parse_line(l));
  TrainOptions options;
  options.hyperparams.dim = 2048;
  options.hyperparams.iterations = 200;
  options.hyperparams.seed = 5;
  const auto outcome = train_model(clean, nsl_kdd_label_map(), options);
  ASSERT_TRUE(outcome.retraining.converged);
  const auto report = evaluate(outcome.model, clean);
  EXPECT_EQ(report.accuracy, outcome.retraining.trace.back().accuracy);
}

}  // namespace
}  // namespace hdc
