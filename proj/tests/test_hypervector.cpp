#include <cmath>

#include <gtest/gtest.h>

#include "hdc/hypervector.hpp"
#include "support/reference_kernel.hpp"

namespace hdc {
namespace {

TEST(RandomHv, IndependentDrawsAreQuasiOrthogonal) {
  RandomSource rng(7);
  const auto a = random_hv(10000, rng);
  const auto b = random_hv(10000, rng);
  const double d = static_cast<double>(hamming(a, b)) / 10000.0;
  EXPECT_GE(d, 0.475);
  EXPECT_LE(d, 0.525);
}

TEST(RandomHv, DeterministicPerSeed) {
  RandomSource r1(42), r2(42);
  EXPECT_EQ(random_hv(64, r1), random_hv(64, r2));

  RandomSource s1(5), s2(5);
  const auto one = random_hv(1, s1);
  EXPECT_EQ(one.dim(), 1u);
  EXPECT_EQ(one, random_hv(1, s2));
  EXPECT_EQ(one.words()[0] >> 1, 0u) << "bits past dim must stay clear";
}

TEST(RandomHv, ZeroDimensionRejected) {
  RandomSource rng(1);
  try {
    random_hv(0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDimension);
  }
}

TEST(Bind, BitwiseDefinition) {
  const auto a = Hypervector::from_string("1010");
  const auto b = Hypervector::from_string("0110");
  EXPECT_EQ(bind(a, b).to_string(), "1100");
  EXPECT_TRUE(bind(a, a).none());
  EXPECT_EQ(bind(a, Hypervector(4)), a);
}

TEST(Bind, DimensionMismatch) {
  try {
    bind(Hypervector(4), Hypervector(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  EXPECT_THROW(hamming(Hypervector(4), Hypervector(5)), Error);
  EXPECT_THROW(cosine(Hypervector(4), AccumulatorVector(5)), Error);
  AccumulatorVector acc(3);
  EXPECT_THROW(accumulate(acc, Hypervector(4), 1.0), Error);
}

TEST(FlipBits, EdgeCounts) {
  RandomSource rng(3);
  const auto hv = random_hv(200, rng);
  EXPECT_EQ(flip_bits(hv, 0, rng), hv);
  EXPECT_EQ(flip_bits(hv, 200, rng), hv.complement());
  EXPECT_THROW(flip_bits(hv, 201, rng), Error);
}

TEST(FlipBits, ExactCountAtFullDimension) {
  RandomSource rng(11);
  const auto hv = random_hv(10000, rng);
  const auto flipped = flip_bits(hv, 1000, rng);
  EXPECT_EQ(hamming(hv, flipped), 1000u);
  EXPECT_EQ(reference::hamming(reference::unpack(hv), reference::unpack(flipped)), 1000u);
}

TEST(Hamming, SmallCases) {
  const auto a = Hypervector::from_string("1010");
  EXPECT_EQ(hamming(a, a), 0u);
  EXPECT_EQ(hamming(a, a.complement()), 4u);
  EXPECT_EQ(hamming(a, Hypervector::from_string("0110")), 2u);
}

TEST(Cosine, HandComputedValues) {
  const auto h = Hypervector::from_string("1110");
  // dot = 2, |h| = sqrt(3), |c| = sqrt(2).
  const double expected = 2.0 / (std::sqrt(3.0) * std::sqrt(2.0));
  const AccumulatorVector c{1, 1, 0, 0};
  EXPECT_NEAR(cosine(h, c).value, expected, 1e-15);
  EXPECT_NEAR(cosine(h, c).value, 0.816496580927726, 1e-12);
  EXPECT_NEAR(cosine(h, c).value, reference::cosine(reference::unpack(h), {1, 1, 0, 0}), 1e-15);

  EXPECT_DOUBLE_EQ(cosine(Hypervector::from_string("1100"), AccumulatorVector{0, 0, 1, 1}).value, 0.0);

  const auto k = Hypervector::from_string("0110101");
  const AccumulatorVector same{0, 1, 1, 0, 1, 0, 1};
  EXPECT_NEAR(cosine(k, same).value, 1.0, 1e-15);
}

TEST(Cosine, DegenerateOperandsReturnZeroWithFlag) {
  const auto zero = Hypervector(4);
  auto s = cosine(zero, AccumulatorVector{1, 2, 3, 4});
  EXPECT_EQ(s.value, 0.0);
  EXPECT_TRUE(s.degenerate);
  s = cosine(Hypervector::from_string("1000"), AccumulatorVector(4));
  EXPECT_EQ(s.value, 0.0);
  EXPECT_TRUE(s.degenerate);
  EXPECT_FALSE(cosine(Hypervector::from_string("1000"), AccumulatorVector{1, 0, 0, 0}).degenerate);
}

TEST(Accumulate, Arithmetic) {
  AccumulatorVector acc{5, 5, 5, 5};
  accumulate(acc, Hypervector::from_string("1111"), -2.0);
  EXPECT_EQ(acc, (AccumulatorVector{3, 3, 3, 3}));

  AccumulatorVector zeros(4);
  accumulate(zeros, Hypervector::from_string("1010"), 1.0);
  EXPECT_EQ(zeros, (AccumulatorVector{1, 0, 1, 0}));

  AccumulatorVector unchanged{1, 2, 3, 4};
  accumulate(unchanged, Hypervector::from_string("1111"), 0.0);
  EXPECT_EQ(unchanged, (AccumulatorVector{1, 2, 3, 4}));
}

// Randomized invariants over both a single-word and a multi-word dimension.
class KernelProperties : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelProperties, HoldOnRandomVectors) {
  const std::size_t dim = GetParam();
  RandomSource rng(1000 + dim);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_hv(dim, rng);
    const auto b = random_hv(dim, rng);
    const auto c = random_hv(dim, rng);
    ASSERT_EQ(bind(bind(a, b), b), a);
    ASSERT_EQ(bind(a, b), bind(b, a));
    ASSERT_EQ(bind(bind(a, b), c), bind(a, bind(b, c)));
    ASSERT_EQ(hamming(a, b), bind(a, b).popcount());
    ASSERT_EQ(reference::unpack(bind(a, b)), reference::bitwise_xor(reference::unpack(a), reference::unpack(b)));

    const auto k = rng.below(dim + 1);
    ASSERT_EQ(hamming(a, flip_bits(a, k, rng)), k);

    AccumulatorVector acc(dim);
    for (std::size_t i = 0; i < dim; ++i) acc[i] = static_cast<double>(rng.below(21)) - 10.0;
    if (a.none() || acc.none()) continue;
    const double base = cosine(a, acc).value;
    for (double s : {0.5, 3.0, 1000.0}) ASSERT_NEAR(cosine(a, acc.scaled(s)).value, base, 1e-9);
    ASSERT_NEAR(base, reference::cosine(reference::unpack(a), {acc.values().begin(), acc.values().end()}), 1e-9);

    AccumulatorVector moved = acc;
    accumulate(moved, a, 1.5);
    ASSERT_GE(cosine(a, moved).value, base - 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, KernelProperties, ::testing::Values(64, 10000));

}  // namespace
}  // namespace hdc
