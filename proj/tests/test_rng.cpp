#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fedcov/rng.hpp>

using namespace fedcov;

// Reference outputs computed with a standalone SplitMix64 implementation
// (plain integer arithmetic, no shared code with rng.hpp).
TEST_CASE("splitmix64 reference sequence for seed 0") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next() == 0x06c45d188009454fULL);
  CHECK(rng.next() == 0xf88bb8a8724c81ecULL);
  CHECK(rng.next() == 0x1b39896a51a8749bULL);
}

TEST_CASE("splitmix64 reference sequence for seed 1234567") {
  SplitMix64 rng(1234567);
  CHECK(rng.next() == 0x599ed017fb08fc85ULL);
  CHECK(rng.next() == 0x2c73f08458540fa5ULL);
  CHECK(rng.next() == 0x883ebce5a3f27c77ULL);
  CHECK(rng.next() == 0x3fbef740e9177b3fULL);
  CHECK(rng.next() == 0xe3b8346708cb5ecdULL);
}

TEST_CASE("unit doubles are word / 2^64") {
  SplitMix64 rng(42);
  CHECK(rng.next_unit() == doctest::Approx(0.7415648787718234).epsilon(1e-15));
  CHECK(rng.next_unit() == doctest::Approx(0.15991039287692013).epsilon(1e-15));
  CHECK(rng.next_unit() == doctest::Approx(0.2786011302551388).epsilon(1e-15));
  CHECK(rng.next_unit() == doctest::Approx(0.3441907165236376).epsilon(1e-15));
}

TEST_CASE("box-muller gaussians consume two words each") {
  SplitMix64 rng(9);
  CHECK(rng.next_gaussian() == doctest::Approx(0.006612471331275783).epsilon(1e-12));
  CHECK(rng.next_gaussian() == doctest::Approx(0.1704038704455722).epsilon(1e-12));
  CHECK(rng.next_gaussian() == doctest::Approx(0.5867034741406604).epsilon(1e-12));
  CHECK(rng.next_gaussian() == doctest::Approx(1.4330859266488996).epsilon(1e-12));
}

TEST_CASE("next_below stays in range and is deterministic") {
  SplitMix64 a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_below(17);
    CHECK(x < 17);
    CHECK(x == b.next_below(17));
  }
}

TEST_CASE("derive_seed separates streams, clients and rounds") {
  const auto base = derive_seed(1, seed_stream::kTrain, 0, 0);
  CHECK(derive_seed(1, seed_stream::kNoise, 0, 0) != base);
  CHECK(derive_seed(1, seed_stream::kTrain, 1, 0) != base);
  CHECK(derive_seed(1, seed_stream::kTrain, 0, 1) != base);
  CHECK(derive_seed(2, seed_stream::kTrain, 0, 0) != base);
  CHECK(derive_seed(1, seed_stream::kTrain, 0, 0) == base);
}

TEST_CASE("gaussian moments are sane") {
  SplitMix64 rng(2024);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}
