#include <cmath>

#include <doctest.h>

#include "anymlc/class_balance.hpp"
#include "anymlc/rng.hpp"

using namespace anymlc;

TEST_CASE("count_labels") {
  {
    BinaryMatrix labels(3, 2);
    labels.values = {1, 0, 0, 0, 1, 1};
    const auto counts = count_labels(labels);
    CHECK(counts.per_class == std::vector<std::uint64_t>{2, 1});
    CHECK(counts.negative == 1);
    CHECK(counts.total_instances == 3);
  }
  {
    BinaryMatrix labels(4, 3);  // all zero
    const auto counts = count_labels(labels);
    CHECK(counts.per_class == std::vector<std::uint64_t>{0, 0, 0});
    CHECK(counts.negative == 4);
  }
  {
    BinaryMatrix labels(1, 3);
    labels.values = {1, 1, 1};
    const auto counts = count_labels(labels);
    CHECK(counts.per_class == std::vector<std::uint64_t>{1, 1, 1});
    CHECK(counts.negative == 0);
  }
  CHECK_THROWS_AS(count_labels(BinaryMatrix{}), InvalidInputError);
}

TEST_CASE("effective_weights known values") {
  SUBCASE("beta = 0 gives unit weights") {
    ClassCounts counts;
    counts.per_class = {3, 700, 12};
    counts.negative = 5;
    auto w = effective_weights(counts, 0.0, false);
    for (double v : w.per_class) CHECK(v == 1.0);
    w = effective_weights(counts, 0.0, true);
    for (double v : w.per_class) CHECK(v == 1.0);
    CHECK(*w.negative == 1.0);
  }
  SUBCASE("two classes plus negatives, beta = 0.9") {
    ClassCounts counts;
    counts.per_class = {10, 90};
    counts.negative = 100;
    const auto w = effective_weights(counts, 0.9, true);
    // reference values recomputed at high precision
    CHECK(w.per_class[0] == doctest::Approx(1.3028127501452846).epsilon(1e-12));
    CHECK(w.per_class[1] == doctest::Approx(0.8486146778979108).epsilon(1e-12));
    CHECK(*w.negative == doctest::Approx(0.8485725719568046).epsilon(1e-12));
  }
  SUBCASE("single class normalizes to one") {
    ClassCounts counts;
    counts.per_class = {5};
    counts.negative = 0;
    const auto w = effective_weights(counts, 0.5, false);
    CHECK(w.per_class[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("effective_weights errors") {
  ClassCounts counts;
  counts.per_class = {4, 0, 9};
  counts.negative = 2;
  CHECK_THROWS_AS(effective_weights(counts, 0.9, false), ZeroCountError);
  CHECK_THROWS_WITH_AS(effective_weights(counts, 0.9, false),
                       doctest::Contains("class 1"), ZeroCountError);
  counts.per_class = {4, 3, 9};
  counts.negative = 0;
  CHECK_THROWS_AS(effective_weights(counts, 0.9, true), ZeroCountError);
  CHECK_THROWS_AS(effective_weights(counts, 1.0, false), InvalidConfigError);
  CHECK_THROWS_AS(effective_weights(counts, -0.1, false), InvalidConfigError);
}

TEST_CASE("normalization and monotonicity over random counts") {
  Rng rng(99);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t m = 1 + rng.uniform_index(20);
    ClassCounts counts;
    counts.per_class.resize(m);
    for (auto& c : counts.per_class) c = 1 + rng.uniform_index(100000);
    counts.negative = 1 + rng.uniform_index(100000);
    const double beta = rng.uniform(0.0, 0.99999);

    const auto w = effective_weights(counts, beta, false);
    double sum = 0.0;
    for (double v : w.per_class) sum += v;
    CHECK(std::abs(sum - static_cast<double>(m)) < 1e-9);

    const auto wn = effective_weights(counts, beta, true);
    sum = *wn.negative;
    for (double v : wn.per_class) sum += v;
    CHECK(std::abs(sum - static_cast<double>(m + 1)) < 1e-9);

    if (beta > 0.0) {
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          if (counts.per_class[a] < counts.per_class[b]) {
            CHECK(w.per_class[a] >= w.per_class[b]);
          } else if (counts.per_class[a] > counts.per_class[b]) {
            CHECK(w.per_class[a] <= w.per_class[b]);
          }
        }
      }
    }
  }
}

TEST_CASE("beta near one approaches inverse-frequency weighting") {
  ClassCounts counts;
  counts.per_class = {13, 470, 2900, 10000};
  counts.negative = 0;
  const auto w = effective_weights(counts, 1.0 - 1e-9, false);
  double lo = 1e300, hi = 0.0;
  for (std::size_t j = 0; j < counts.per_class.size(); ++j) {
    const double product =
        w.per_class[j] * static_cast<double>(counts.per_class[j]);
    lo = std::min(lo, product);
    hi = std::max(hi, product);
  }
  CHECK((hi - lo) / hi < 0.01);
}

TEST_CASE("balance weights serialize to flat json") {
  ClassCounts counts;
  counts.per_class = {10, 90};
  counts.negative = 100;
  const auto w = effective_weights(counts, 0.9, true);
  const auto j = w.to_json();
  CHECK(j.at("beta").get<double>() == 0.9);
  CHECK(j.at("per_class").size() == 2);
  const auto round_trip = BalanceWeights::from_json(j);
  CHECK(round_trip.per_class == w.per_class);
  CHECK(round_trip.negative == w.negative);
  CHECK(round_trip.beta == w.beta);

  BalanceWeights no_neg;
  no_neg.per_class = {1.0};
  no_neg.beta = 0.0;
  const auto j2 = no_neg.to_json();
  CHECK(j2.at("negative").is_null());
  CHECK_FALSE(BalanceWeights::from_json(j2).negative.has_value());
}
