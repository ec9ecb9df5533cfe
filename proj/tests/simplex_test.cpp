// Copyright 2026 The unside authors
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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <unside/simplex.hpp>
#include <unside/special.hpp>

#include "support/test_util.hpp"

using namespace unside;
using Catch::Approx;

TEST_CASE("log_gamma matches the standard library to 1e-12") {
  // Relative where lgamma is large, absolute near its zeros at 1 and 2.
  for (double x = 0.5; x < 20.0; x += 0.37) {
    const double ref = std::lgamma(x);
    REQUIRE(std::abs(log_gamma(x) - ref) <=
            1e-12 * std::max(1.0, std::abs(ref)));
  }
  for (double x : {50.0, 1e3, 1e4, 1e6}) {
    const double ref = std::lgamma(x);
    REQUIRE(std::abs(log_gamma(x) - ref) <= 1e-12 * std::abs(ref));
  }
  REQUIRE_THROWS_AS(log_gamma(0.0), std::invalid_argument);
}

TEST_CASE("gamma sampling moments") {
  RngStream rng(7);
  const std::int64_t n = 100000;

  SECTION("shape 1 is Exp(1)") {
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_gamma(1.0, rng);
    const double m = test::mean_of(draws);
    REQUIRE(std::abs(m - 1.0) <= 3.0 * test::std_error_of_mean(draws));
  }

  SECTION("shape 4 has mean 4 and variance 4") {
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_gamma(4.0, rng);
    const double m = test::mean_of(draws);
    const double v = test::variance_of(draws);
    REQUIRE(std::abs(m - 4.0) <= 3.0 * test::std_error_of_mean(draws));
    // Var of the sample variance ~ (mu4 - sigma^4)/n with mu4 = 3a(a+2) = 72.
    const double se_var = std::sqrt((72.0 - 16.0) / static_cast<double>(n));
    REQUIRE(std::abs(v - 4.0) <= 3.0 * se_var);
  }

  SECTION("sub-unit shapes keep the right mean") {
    std::vector<double> draws(n);
    for (auto& d : draws) d = sample_gamma(0.3, rng);
    REQUIRE(std::abs(test::mean_of(draws) - 0.3) <=
            4.0 * test::std_error_of_mean(draws));
  }

  SECTION("non-positive shape is rejected") {
    REQUIRE_THROWS_AS(sample_gamma(0.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_gamma(-1.0, rng), std::invalid_argument);
  }
}

TEST_CASE("dirichlet sampling means and interior clamp") {
  RngStream rng(11);
  const std::int64_t n = 100000;

  SECTION("uniform parameters give uniform means") {
    double acc0 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto x = sample_dirichlet(DirichletParams({1.0, 1.0, 1.0}), rng);
      acc0 += x[0];
      REQUIRE(std::abs(x.sum() - 1.0) <= kSumTol);
    }
    const double se = std::sqrt(test::dirichlet_coord_var(1.0, 3.0) / n);
    REQUIRE(std::abs(acc0 / n - 1.0 / 3.0) <= 3.0 * se);
  }

  SECTION("mean of the boosted coordinate is alpha_i over the total") {
    double acc0 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      acc0 += sample_dirichlet(DirichletParams({4.0, 1.0, 1.0}), rng)[0];
    }
    const double se = std::sqrt(test::dirichlet_coord_var(4.0, 6.0) / n);
    REQUIRE(std::abs(acc0 / n - 4.0 / 6.0) <= 3.0 * se);
  }

  SECTION("per-coordinate means across K and alpha") {
    for (int K : {2, 3, 5}) {
      for (bool boosted : {false, true}) {
        std::vector<double> alpha(K, 1.0);
        if (boosted) alpha[0] += 3.0;
        const double total = boosted ? K + 3.0 : K;
        std::vector<double> acc(K, 0.0);
        const std::int64_t reps = 100000;
        for (std::int64_t i = 0; i < reps; ++i) {
          const auto x = sample_dirichlet(DirichletParams(alpha), rng);
          for (int k = 0; k < K; ++k) acc[k] += x[k];
        }
        for (int k = 0; k < K; ++k) {
          const double se =
              std::sqrt(test::dirichlet_coord_var(alpha[k], total) / reps);
          REQUIRE(std::abs(acc[k] / reps - alpha[k] / total) <= 4.0 * se);
        }
      }
    }
  }

  SECTION("huge concentration pins the coordinate") {
    int hits = 0;
    const int reps = 10000;
    for (int i = 0; i < reps; ++i) {
      if (sample_dirichlet(DirichletParams({1e6, 1.0, 1.0}), rng)[0] > 0.99) {
        ++hits;
      }
    }
    REQUIRE(static_cast<double>(hits) / reps >= 0.999);
  }

  SECTION("floor holds even for extreme draws") {
    for (int i = 0; i < 2000; ++i) {
      const auto x = sample_dirichlet(DirichletParams({50.0, 0.2, 0.2}), rng);
      REQUIRE(x[0] >= kCoordFloor);
      REQUIRE(x[1] >= kCoordFloor);
      REQUIRE(x[2] >= kCoordFloor);
      REQUIRE(std::abs(x.sum() - 1.0) <= kSumTol);
    }
  }
}

TEST_CASE("gamma normalization preserves the argmax") {
  RngStream rng(13);
  for (int i = 0; i < 20000; ++i) {
    std::vector<double> g(4);
    double total = 0.0;
    for (auto& v : g) {
      v = sample_gamma(0.5 + rng.uniform01() * 3.0, rng);
      total += v;
    }
    const int argmax_raw = static_cast<int>(
        std::max_element(g.begin(), g.end()) - g.begin());
    for (auto& v : g) v /= total;
    const SimplexPoint x(std::move(g));
    REQUIRE(nearest_vertex(x) == argmax_raw);
  }
}

TEST_CASE("dirichlet log density closed values") {
  SECTION("uniform density is log (K-1)!") {
    RngStream rng(3);
    for (int K : {2, 3, 5}) {
      const DirichletParams params{std::vector<double>(K, 1.0)};
      const auto x = sample_dirichlet(params, rng);
      REQUIRE(dirichlet_log_density(params, x) ==
              Approx(log_gamma(K)).epsilon(1e-12));
    }
  }
  SECTION("hand-evaluated Beta cases") {
    const SimplexPoint x1(std::vector<double>{0.9, 0.1});
    REQUIRE(dirichlet_log_density(DirichletParams({4.0, 1.0}), x1) ==
            Approx(std::log(2.916)).epsilon(1e-10));
    const SimplexPoint x2(std::vector<double>{0.5, 0.5});
    REQUIRE(dirichlet_log_density(DirichletParams({2.0, 2.0}), x2) ==
            Approx(std::log(1.5)).epsilon(1e-10));
  }
  SECTION("dimension mismatch is rejected") {
    const SimplexPoint x(std::vector<double>{0.5, 0.5});
    REQUIRE_THROWS_AS(
        dirichlet_log_density(DirichletParams({1.0, 1.0, 1.0}), x),
        std::invalid_argument);
  }
}

TEST_CASE("dirichlet density integrates to one over the simplex") {
  // Importance sampling with uniform (Dir(1)) proposals whose density is
  // (K-1)! on the simplex.
  RngStream rng(17);
  for (int K : {2, 3}) {
    const DirichletParams target{K == 2 ? std::vector<double>{3.0, 1.5}
                                        : std::vector<double>{2.0, 1.0, 3.0}};
    const DirichletParams proposal{std::vector<double>(K, 1.0)};
    const double log_uniform = log_gamma(K);
    const std::int64_t n = 200000;
    std::vector<double> ratios(n);
    for (auto& r : ratios) {
      const auto x = sample_dirichlet(proposal, rng);
      r = std::exp(dirichlet_log_density(target, x) - log_uniform);
    }
    const double est = test::mean_of(ratios);
    const double se = test::std_error_of_mean(ratios);
    REQUIRE(std::abs(est - 1.0) <= 3.0 * se);
  }
}

TEST_CASE("marginal mixture prior") {
  RngStream rng(19);
  const std::int64_t n = 100000;

  SECTION("kappa zero reduces to the uniform prior") {
    const MarginalMixturePrior prior(
        CategoricalDist::from_probs({0.9, 0.05, 0.05}), 0.0);
    std::vector<double> acc(3, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto x = sample_marginal_prior(prior, rng);
      for (int k = 0; k < 3; ++k) acc[k] += x[k];
    }
    const double se = std::sqrt(test::dirichlet_coord_var(1.0, 3.0) / n);
    for (int k = 0; k < 3; ++k) {
      REQUIRE(std::abs(acc[k] / n - 1.0 / 3.0) <= 3.0 * se);
    }
  }

  SECTION("point marginal concentrates its coordinate") {
    const MarginalMixturePrior prior(CategoricalDist::from_probs({1.0, 0.0}),
                                     2.0);
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      acc += sample_marginal_prior(prior, rng)[0];
    }
    // Dir(3, 1): mean 3/4.
    const double se = std::sqrt(test::dirichlet_coord_var(3.0, 4.0) / n);
    REQUIRE(std::abs(acc / n - 0.75) <= 3.0 * se);
  }

  SECTION("symmetric mixture has symmetric means") {
    const MarginalMixturePrior prior(CategoricalDist::from_probs({0.5, 0.5}),
                                     2.0);
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      acc += sample_marginal_prior(prior, rng)[0];
    }
    // Coordinate variance under the mixture is below the single-component
    // bound, so the Dir(3,1) value is a safe envelope.
    const double se = std::sqrt(0.25 / n) * 3.0;
    REQUIRE(std::abs(acc / n - 0.5) <= 3.0 * se);
  }

  SECTION("negative kappa is rejected") {
    REQUIRE_THROWS_AS(
        MarginalMixturePrior(CategoricalDist::uniform(2), -1.0),
        std::invalid_argument);
  }
}

TEST_CASE("nearest vertex") {
  REQUIRE(nearest_vertex(SimplexPoint(std::vector<double>{0.7, 0.2, 0.1})) == 0);
  REQUIRE(nearest_vertex(SimplexPoint(std::vector<double>{0.5, 0.5})) == 0);
  REQUIRE(nearest_vertex(SimplexPoint::vertex(2, 4)) == 2);
}

TEST_CASE("simplex point validation") {
  REQUIRE_THROWS_AS(SimplexPoint(std::vector<double>{1.0}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SimplexPoint(std::vector<double>{0.9, 0.4}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SimplexPoint(std::vector<double>{0.5, -0.5, 1.0}),
                    std::invalid_argument);
  const SimplexPoint v = SimplexPoint::vertex(0, 3);
  REQUIRE(v[0] == Approx(1.0 - 2 * kCoordFloor));
  REQUIRE(v[1] == kCoordFloor);
}

TEST_CASE("categorical distribution sampling and logits") {
  RngStream rng(23);
  const auto d = CategoricalDist::from_probs({0.2, 0.5, 0.3});
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[d.sample(rng)];
  for (int k = 0; k < 3; ++k) {
    const double p = d.prob(k);
    REQUIRE(std::abs(counts[k] / static_cast<double>(n) - p) <=
            4.0 * test::binomial_se(p, n));
  }
  const auto e = CategoricalDist::from_logits({1.0, 1.0, 1.0});
  for (int k = 0; k < 3; ++k) REQUIRE(e.prob(k) == Approx(1.0 / 3.0));
}
