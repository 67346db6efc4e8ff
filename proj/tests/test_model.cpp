#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "phhmm/common.hpp"
#include "phhmm/model.hpp"
#include "phhmm/presets.hpp"

using namespace phhmm;

TEST_CASE("emission_eval across families") {
  const EmissionLaw deg = DegenerateEmission{0.0};
  CHECK(emission_eval(deg, 0.0) == 1.0);
  CHECK(emission_eval(deg, 3.0) == 0.0);

  const EmissionLaw pois = PoissonEmission{5.0};
  CHECK(emission_eval(pois, 0.0) == doctest::Approx(std::exp(-5.0)));
  CHECK(emission_eval(pois, 0.5) == 0.0);   // off the count support
  CHECK(emission_eval(pois, -1.0) == 0.0);

  const EmissionLaw expo = ExponentialEmission{6.006};
  CHECK(emission_mean(expo) == doctest::Approx(0.1665).epsilon(1e-3));
  CHECK(emission_eval(expo, 0.0) == doctest::Approx(6.006));
  CHECK(emission_eval(expo, -0.1) == 0.0);

  const EmissionLaw cat = CategoricalEmission{{0.0, 2.0, 5.0}, {0.2, 0.5, 0.3}};
  CHECK(emission_eval(cat, 2.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(emission_eval(cat, 1.0), DataError);
}

TEST_CASE("emission validation") {
  CHECK_THROWS_AS(emission_validate(PoissonEmission{0.0}), DataError);
  CHECK_THROWS_AS(emission_validate(ExponentialEmission{-1.0}), DataError);
  CHECK_THROWS_AS(emission_validate(CategoricalEmission{{0.0, 1.0}, {0.5, 0.6}}), DataError);
  CHECK_NOTHROW(emission_validate(CategoricalEmission{{0.0, 1.0}, {0.5, 0.5}}));
}

TEST_CASE("emission sampling is deterministic and unbiased") {
  const EmissionLaw deg = DegenerateEmission{0.0};
  RandomStream r0(5);
  for (int i = 0; i < 8; ++i) CHECK(emission_sample(deg, r0) == 0.0);

  RandomStream a(11), b(11);
  const EmissionLaw pois = PoissonEmission{5.0};
  for (int i = 0; i < 16; ++i) CHECK(emission_sample(pois, a) == emission_sample(pois, b));

  RandomStream rng(17);
  const std::size_t n = 100000;
  Vec draws(n);
  for (auto& x : draws) x = emission_sample(pois, rng);
  const double se = testutil::sd_of(draws) / std::sqrt(double(n));
  CHECK(std::abs(testutil::mean_of(draws) - 5.0) < 3.0 * se);
}

TEST_CASE("discrete emission mass sums to one over its support") {
  const EmissionLaw pois = PoissonEmission{5.0};
  double acc = 0.0;
  for (long k = 0; k < 200; ++k) acc += emission_eval(pois, double(k));
  CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));

  const EmissionLaw cat = CategoricalEmission{{0.0, 1.0, 4.0}, {0.25, 0.5, 0.25}};
  CHECK(emission_eval(cat, 0.0) + emission_eval(cat, 1.0) + emission_eval(cat, 4.0) ==
        doctest::Approx(1.0));
}

TEST_CASE("two-regime demo model validates") {
  CHECK_NOTHROW(preset_two_regime_demo());
  const PhTypeHmm m = preset_two_regime_demo();
  CHECK(m.num_regimes() == 2);
  CHECK(m.extended_size() == 4);
}

TEST_CASE("model validation rejects structural violations") {
  auto sojourns = [] {
    std::vector<DiscretePhaseType> s;
    s.push_back(dph_degenerate_one_step());
    s.push_back(dph_degenerate_one_step());
    return s;
  };
  // Nonzero jump diagonal.
  CHECK_THROWS_AS(PhTypeHmm::validate({}, {0.5, 0.5}, {{0.5, 0.5}, {1.0, 0.0}}, sojourns(),
                                      {DegenerateEmission{0.0}, PoissonEmission{5.0}}),
                  DataError);
  // Mixed signal kinds.
  CHECK_THROWS_AS(PhTypeHmm::validate({}, {0.5, 0.5}, {{0.0, 1.0}, {1.0, 0.0}}, sojourns(),
                                      {CategoricalEmission{{0.0, 1.0}, {0.5, 0.5}},
                                       ExponentialEmission{1.0}}),
                  DataError);
  // Jump row not stochastic.
  CHECK_THROWS_AS(PhTypeHmm::validate({}, {0.5, 0.5}, {{0.0, 0.8}, {1.0, 0.0}}, sojourns(),
                                      {DegenerateEmission{0.0}, PoissonEmission{5.0}}),
                  DataError);
  // Beta off by more than the tolerance.
  CHECK_THROWS_AS(PhTypeHmm::validate({}, {0.6, 0.6}, {{0.0, 1.0}, {1.0, 0.0}}, sojourns(),
                                      {DegenerateEmission{0.0}, PoissonEmission{5.0}}),
                  DataError);
}

TEST_CASE("single-regime model accepted with empty jump") {
  std::vector<DiscretePhaseType> s;
  s.push_back(dph_degenerate_one_step());
  const PhTypeHmm m = PhTypeHmm::validate({}, {1.0}, Matrix(), std::move(s),
                                          {DegenerateEmission{0.0}});
  CHECK(m.num_regimes() == 1);
  CHECK(m.jump().rows() == 0);
}

TEST_CASE("semi-Markov kernel") {
  const PhTypeHmm m = preset_two_regime_demo();
  CHECK(semi_markov_kernel(m, 0, 0, 1) == 0.0);
  CHECK(semi_markov_kernel(m, 1, 1, 3) == 0.0);
  CHECK(semi_markov_kernel(m, 0, 1, 1) == doctest::Approx(0.15));
  CHECK_THROWS_AS(semi_markov_kernel(m, 0, 5, 1), DataError);

  for (std::size_t i = 0; i < 2; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 2; ++j)
      for (long n = 1; n <= 500; ++n) total += semi_markov_kernel(m, i, j, n);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("kernel factorizes as jump times sojourn pmf on random models") {
  RandomStream rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const PhTypeHmm m = testutil::random_model({2, 1, 2}, testutil::RandomEmission::Poisson, rng);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (long n = 1; n <= 6; ++n) {
          const double expected = i == j ? 0.0 : m.jump()(i, j) * m.sojourn()[i].pmf(n);
          CHECK(semi_markov_kernel(m, i, j, n) == doctest::Approx(expected).epsilon(1e-12));
        }
  }
}

TEST_CASE("canonical regime order sorts by emission mean") {
  std::vector<DiscretePhaseType> s;
  s.push_back(dph_geometric(0.5));
  s.push_back(dph_degenerate_one_step());
  const PhTypeHmm m =
      PhTypeHmm::validate({"wet", "drought"}, {0.3, 0.7}, {{0.0, 1.0}, {1.0, 0.0}}, std::move(s),
                          {PoissonEmission{7.0}, DegenerateEmission{0.0}});
  const PhTypeHmm c = canonical_regime_order(m);
  CHECK(c.regime_labels()[0] == "drought");
  CHECK(c.beta()[0] == doctest::Approx(0.7));
  CHECK(emission_mean(c.emission()[0]) < emission_mean(c.emission()[1]));
}

TEST_CASE("canonical phase order sorts by descending alpha") {
  std::vector<DiscretePhaseType> s;
  s.push_back(DiscretePhaseType::validate({0.2, 0.8}, {{0.1, 0.2}, {0.3, 0.4}}));
  const PhTypeHmm m = PhTypeHmm::validate({}, {1.0}, Matrix(), std::move(s),
                                          {PoissonEmission{2.0}});
  const PhTypeHmm c = canonical_phase_order(m);
  CHECK(c.sojourn()[0].alpha()[0] == doctest::Approx(0.8));
  CHECK(c.sojourn()[0].transient()(0, 0) == doctest::Approx(0.4));
  CHECK(c.sojourn()[0].transient()(0, 1) == doctest::Approx(0.3));
  // Relabeling phases preserves the law itself.
  CHECK(c.sojourn()[0].mean() == doctest::Approx(m.sojourn()[0].mean()));
  for (long n = 1; n <= 10; ++n)
    CHECK(c.sojourn()[0].pmf(n) == doctest::Approx(m.sojourn()[0].pmf(n)));
}
