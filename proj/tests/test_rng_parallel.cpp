// Copyright 2026 The LQE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <numeric>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "lqe/parallel.hpp"
#include "lqe/rng.hpp"

using lqe::Index;
using lqe::Rng;

namespace {

// Textbook SplitMix64 with an explicit state word.
struct ReferenceSplitMix {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

}  // namespace

TEST_CASE("splitmix finalizer matches the published first output for state 0") {
  ReferenceSplitMix ref{0};
  CHECK(ref.next() == 0xE220A8397B1DCDAFULL);
  CHECK(Rng::mix(Rng::kGolden) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("stream outputs equal a textbook splitmix sequence started at the stream key") {
  for (std::uint64_t seed : {0ULL, 42ULL, 0xDEADBEEFULL}) {
    for (std::uint64_t stream : {0ULL, 1ULL, 1ULL << 40}) {
      const std::uint64_t key = Rng::mix(seed ^ Rng::mix(stream + Rng::kGolden));
      ReferenceSplitMix ref{key};
      Rng rng(seed, stream);
      for (int i = 0; i < 100; ++i) REQUIRE(rng.next() == ref.next());
      CHECK(rng.counter() == 100);
    }
  }
}

TEST_CASE("same seed and stream reproduce; different streams diverge") {
  Rng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs_c |= x != c.next();
    differs_d |= x != d.next();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("uniform draws lie in [0, 1) and normals have unit moments") {
  Rng rng(123);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // 5 standard errors
  CHECK(std::abs(mean) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("each normal consumes exactly two outputs") {
  Rng rng(5);
  rng.normal();
  CHECK(rng.counter() == 2);
  rng.normal(3.0, 2.0);
  CHECK(rng.counter() == 4);
}

TEST_CASE("below(n) stays in range and hits every value") {
  Rng rng(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK(rng.below(0) == 0);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("parallel_for visits every index exactly once for any thread count") {
  for (int threads : {1, 2, 3, 8}) {
    std::vector<std::atomic<int>> hits(101);
    lqe::parallel_for(101, threads, [&](Index i) { hits[static_cast<std::size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("parallel_for rethrows a worker exception") {
  CHECK_THROWS_AS(lqe::parallel_for(10, 4,
                                    [](Index i) {
                                      if (i == 7) throw std::runtime_error("boom");
                                    }),
                  std::runtime_error);
}

TEST_CASE("pairwise_sum uses a fixed tree") {
  CHECK(lqe::pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(lqe::pairwise_sum(std::vector<double>{4.0}) == 4.0);
  // ((a+b)+(c+d))+e, evaluated by hand
  const std::vector<double> v{1e16, 1.0, -1e16, 1.0, 0.5};
  const double expected = ((1e16 + 1.0) + (-1e16 + 1.0)) + 0.5;
  CHECK(lqe::pairwise_sum(v) == expected);
  std::vector<double> many(1000);
  std::iota(many.begin(), many.end(), 1.0);
  CHECK(lqe::pairwise_sum(many) == 500500.0);
}
