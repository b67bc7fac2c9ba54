#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "support/oracles.hpp"
#include "vinegc/copula.hpp"
#include "vinegc/numerics.hpp"

using namespace vinegc;

namespace {

// Three-parameter grid per family used across the calculus properties.
const std::map<CopulaFamily, std::vector<std::vector<double>>> param_grid = {
    {CopulaFamily::independence, {{}}},
    {CopulaFamily::gaussian, {{-0.8}, {0.3}, {0.7}}},
    {CopulaFamily::student_t, {{0.5, 4.0}, {-0.6, 8.0}, {0.2, 25.0}}},
    {CopulaFamily::clayton, {{0.7}, {2.0}, {6.0}}},
    {CopulaFamily::gumbel, {{1.3}, {2.5}, {5.0}}},
    {CopulaFamily::frank, {{-12.0}, {4.0}, {20.0}}},
    {CopulaFamily::joe, {{1.5}, {3.0}, {7.0}}},
};

std::vector<PairCopula> grid_copulas() {
  std::vector<PairCopula> out;
  for (const auto& [fam, grid] : param_grid) {
    for (const auto& theta : grid) out.emplace_back(fam, theta);
  }
  // a few rotated representatives
  out.emplace_back(CopulaFamily::clayton, std::vector<double>{2.0},
                   Rotation::deg90);
  out.emplace_back(CopulaFamily::gumbel, std::vector<double>{2.0},
                   Rotation::deg180);
  out.emplace_back(CopulaFamily::joe, std::vector<double>{2.5},
                   Rotation::deg270);
  return out;
}

}  // namespace

TEST_CASE("pdf matches the stated reference values") {
  CHECK(pdf(PairCopula(), {0.3, 0.7}) == doctest::Approx(1.0));
  CHECK(pdf(PairCopula(CopulaFamily::gaussian, {0.0}), {0.3, 0.7}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // closed-form bivariate normal copula density at the median pair
  const double rho = 0.5;
  CHECK(pdf(PairCopula(CopulaFamily::gaussian, {rho}), {0.5, 0.5}) ==
        doctest::Approx(1.0 / std::sqrt(1.0 - rho * rho)).epsilon(1e-12));
}

TEST_CASE("cdf matches the stated reference values") {
  CHECK(cdf(PairCopula(), {0.3, 0.7}) == doctest::Approx(0.21));
  const double clayton_closed =
      std::pow(std::pow(0.4, -2.0) + std::pow(0.6, -2.0) - 1.0, -0.5);
  CHECK(cdf(PairCopula(CopulaFamily::clayton, {2.0}), {0.4, 0.6}) ==
        doctest::Approx(clayton_closed).epsilon(1e-12));
}

TEST_CASE("cdf boundary behaviour: uniform margins") {
  for (const PairCopula& c : grid_copulas()) {
    for (double u : {0.2, 0.5, 0.8}) {
      CHECK(cdf(c, {u, 1.0 - 1e-10}) == doctest::Approx(u).epsilon(1e-6));
      CHECK(cdf(c, {1e-10, u}) <= 1e-6 + 1e-10);
    }
  }
}

TEST_CASE("hfunc trivial values") {
  CHECK(hfunc(PairCopula(), {0.3, 0.7}, 1) == doctest::Approx(0.7));
  CHECK(hfunc(PairCopula(CopulaFamily::gaussian, {0.5}), {0.5, 0.5}, 1) ==
        doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("hfunc matches a finite difference of the cdf (Frank example)") {
  const PairCopula c(CopulaFamily::frank, {5.0});
  const double h = 1e-6;
  const double fd =
      (cdf(c, {0.2, 0.8 + h}) - cdf(c, {0.2, 0.8 - h})) / (2.0 * h);
  CHECK(hfunc(c, {0.2, 0.8}, 2) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("hfunc equals the cdf partial derivative on a 5x5 interior grid") {
  const double h = 1e-6;
  for (const PairCopula& c : grid_copulas()) {
    double max_err = 0.0;
    for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      for (double v : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double fd1 =
            (cdf(c, {u + h, v}) - cdf(c, {u - h, v})) / (2.0 * h);
        max_err = std::max(max_err, std::abs(fd1 - hfunc(c, {u, v}, 1)));
        const double fd2 =
            (cdf(c, {u, v + h}) - cdf(c, {u, v - h})) / (2.0 * h);
        max_err = std::max(max_err, std::abs(fd2 - hfunc(c, {u, v}, 2)));
      }
    }
    INFO("family ", family_name(c.family()), " rot ",
         static_cast<int>(c.rotation()));
    CHECK(max_err < 1e-5);
  }
}

TEST_CASE("pdf integrates to one on a 200x200 Gauss-Legendre tensor grid") {
  const auto q = num::gauss_legendre(200, 0.0, 1.0);
  for (const PairCopula& c : grid_copulas()) {
    double mass = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < q.nodes.size(); ++j) {
        row += q.weights[j] * pdf(c, {q.nodes[i], q.nodes[j]});
      }
      mass += q.weights[i] * row;
    }
    INFO("family ", family_name(c.family()), " rot ",
         static_cast<int>(c.rotation()));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("hinv inverts hfunc on a 10x10 interior grid") {
  for (const PairCopula& c : grid_copulas()) {
    double max_err = 0.0;
    for (int i = 1; i <= 10; ++i) {
      for (int j = 1; j <= 10; ++j) {
        const double u = i / 11.0, v = j / 11.0;
        const double w1 = hfunc(c, {u, v}, 1);
        max_err = std::max(max_err, std::abs(hinv(c, w1, u, 1) - v));
        const double w2 = hfunc(c, {u, v}, 2);
        max_err = std::max(max_err, std::abs(hinv(c, w2, v, 2) - u));
      }
    }
    INFO("family ", family_name(c.family()), " rot ",
         static_cast<int>(c.rotation()));
    CHECK(max_err < 1e-8);
  }
}

TEST_CASE("hinv trivial and derived examples") {
  CHECK(hinv(PairCopula(), 0.4, 0.9, 1) == doctest::Approx(0.4));
  const PairCopula cl(CopulaFamily::clayton, {3.0});
  const double root = hinv(cl, 0.5, 0.5, 1);
  CHECK(hfunc(cl, {0.5, root}, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("tau links and inverse links") {
  CHECK(tau(PairCopula()) == doctest::Approx(0.0));
  CHECK(tau(PairCopula(CopulaFamily::gaussian, {0.5})) ==
        doctest::Approx(2.0 * std::asin(0.5) / M_PI).epsilon(1e-12));
  CHECK(tau(PairCopula(CopulaFamily::clayton, {2.0})) ==
        doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("tau_to_param recovers theta within 1e-6") {
    for (auto [fam, theta] :
         std::vector<std::pair<CopulaFamily, double>>{
             {CopulaFamily::gaussian, -0.55},
             {CopulaFamily::clayton, 2.2},
             {CopulaFamily::gumbel, 3.1},
             {CopulaFamily::frank, -7.5},
             {CopulaFamily::frank, 11.0},
             {CopulaFamily::joe, 4.4}}) {
      const PairCopula c(fam, {theta});
      const auto back = tau_to_param(fam, tau(c));
      REQUIRE(back.size() == 1);
      CHECK(back[0] == doctest::Approx(theta).epsilon(1e-6));
    }
  }
  SUBCASE("rotations flip the sign of tau") {
    const PairCopula base(CopulaFamily::clayton, {2.0});
    CHECK(tau(PairCopula(CopulaFamily::clayton, {2.0}, Rotation::deg90)) ==
          doctest::Approx(-tau(base)));
    CHECK(tau(PairCopula(CopulaFamily::clayton, {2.0}, Rotation::deg180)) ==
          doctest::Approx(tau(base)));
  }
  SUBCASE("student_t tau inversion is unsupported") {
    CHECK_THROWS_AS(tau_to_param(CopulaFamily::student_t, 0.3),
                    std::logic_error);
  }
}

TEST_CASE("180-degree rotation evaluates the survival density") {
  for (CopulaFamily fam :
       {CopulaFamily::clayton, CopulaFamily::gumbel, CopulaFamily::joe}) {
    const PairCopula base(fam, {2.0});
    const PairCopula rot(fam, {2.0}, Rotation::deg180);
    for (double u : {0.2, 0.5, 0.85}) {
      for (double v : {0.15, 0.6, 0.9}) {
        CHECK(pdf(rot, {u, v}) ==
              doctest::Approx(pdf(base, {1.0 - u, 1.0 - v})).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fit_pair_mle recovers known parameters") {
  SUBCASE("independence has no parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<UnitPair> obs;
    for (int i = 0; i < 100; ++i) obs.emplace_back(unif(rng), unif(rng));
    const PairFit fit = fit_pair_mle(CopulaFamily::independence, obs);
    CHECK(fit.loglik == 0.0);
    CHECK(fit.copula.family() == CopulaFamily::independence);
  }
  SUBCASE("gaussian rho within 3 standard errors") {
    std::mt19937_64 rng(2024);
    const PairCopula truth(CopulaFamily::gaussian, {0.6});
    const auto obs = sample_pair(truth, 2000, rng);
    const PairFit fit = fit_pair_mle(CopulaFamily::gaussian, obs);
    const double se = (1.0 - 0.36) / std::sqrt(2000.0);
    CHECK(std::abs(fit.copula.theta()[0] - 0.6) < 3.0 * se);
  }
  SUBCASE("clayton theta in the stated band") {
    std::mt19937_64 rng(99);
    const PairCopula truth(CopulaFamily::clayton, {2.0});
    const auto obs = sample_pair(truth, 2000, rng);
    const PairFit fit = fit_pair_mle(CopulaFamily::clayton, obs);
    CHECK(fit.copula.theta()[0] > 1.6);
    CHECK(fit.copula.theta()[0] < 2.4);
  }
  SUBCASE("student_t recovers rho and a finite nu") {
    std::mt19937_64 rng(5);
    const PairCopula truth(CopulaFamily::student_t, {0.5, 5.0});
    const auto obs = sample_pair(truth, 2000, rng);
    const PairFit fit = fit_pair_mle(CopulaFamily::student_t, obs);
    CHECK(std::abs(fit.copula.theta()[0] - 0.5) < 0.06);
    CHECK(fit.copula.theta()[1] > 2.0);
    CHECK(fit.copula.theta()[1] < 20.0);
  }
  SUBCASE("too few observations is an input error") {
    std::vector<UnitPair> obs(9, UnitPair(0.5, 0.5));
    CHECK_THROWS_AS(fit_pair_mle(CopulaFamily::gaussian, obs),
                    std::invalid_argument);
  }
}

TEST_CASE("select_family") {
  SUBCASE("independent uniforms select independence") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<UnitPair> obs;
    for (int i = 0; i < 2000; ++i) obs.emplace_back(unif(rng), unif(rng));
    const FamilySelection sel = select_family(obs, all_families());
    CHECK(sel.copula.family() == CopulaFamily::independence);
  }
  SUBCASE("strong gaussian dependence selects an elliptical family") {
    std::mt19937_64 rng(17);
    const PairCopula truth(CopulaFamily::gaussian, {0.8});
    const auto obs = sample_pair(truth, 2000, rng);
    const FamilySelection sel = select_family(obs, all_families());
    const bool elliptical = sel.copula.family() == CopulaFamily::gaussian ||
                            sel.copula.family() == CopulaFamily::student_t;
    CHECK(elliptical);
    CHECK(std::abs(tau(sel.copula) - 0.59) < 0.05);
  }
  SUBCASE("single candidate is a forced choice") {
    std::mt19937_64 rng(3);
    const auto obs = sample_pair(PairCopula(CopulaFamily::gaussian, {0.5}),
                                 200, rng);
    const std::vector<CopulaFamily> only = {CopulaFamily::independence};
    const FamilySelection sel = select_family(obs, only);
    CHECK(sel.copula.family() == CopulaFamily::independence);
  }
  SUBCASE("negative dependence is representable for every candidate") {
    std::mt19937_64 rng(11);
    const auto obs = sample_pair(PairCopula(CopulaFamily::gaussian, {-0.7}),
                                 1500, rng);
    const FamilySelection sel = select_family(obs, all_families());
    CHECK(tau(sel.copula) < -0.3);
  }
}

TEST_CASE("sample_pair") {
  SUBCASE("independence gives near-zero empirical tau") {
    std::mt19937_64 rng(1);
    const auto obs = sample_pair(PairCopula(), 10000, rng);
    std::vector<double> u, v;
    for (const auto& p : obs) {
      u.push_back(p.u);
      v.push_back(p.v);
    }
    CHECK(std::abs(num::kendall_tau(u, v)) < 0.03);
  }
  SUBCASE("gaussian rho=0.5 gives tau near 1/3") {
    std::mt19937_64 rng(2);
    const auto obs =
        sample_pair(PairCopula(CopulaFamily::gaussian, {0.5}), 10000, rng);
    std::vector<double> u, v;
    for (const auto& p : obs) {
      u.push_back(p.u);
      v.push_back(p.v);
    }
    CHECK(std::abs(num::kendall_tau(u, v) - 1.0 / 3.0) < 0.03);
  }
  SUBCASE("fixed seed reproduces the sequence") {
    std::mt19937_64 a(77), b(77);
    const auto s1 = sample_pair(PairCopula(CopulaFamily::frank, {4.0}), 50, a);
    const auto s2 = sample_pair(PairCopula(CopulaFamily::frank, {4.0}), 50, b);
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].u == s2[i].u);
      CHECK(s1[i].v == s2[i].v);
    }
  }
}

TEST_CASE("parameter domain validation") {
  CHECK_THROWS_AS(PairCopula(CopulaFamily::gaussian, {1.0}),
                  std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::clayton, {0.0}), std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::clayton, {29.0}),
                  std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::gumbel, {0.9}), std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::frank, {0.0}), std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::joe, {1.0}), std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::student_t, {0.5, 1.5}),
                  std::domain_error);
  CHECK_THROWS_AS(PairCopula(CopulaFamily::gaussian, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      PairCopula(CopulaFamily::gaussian, {0.5}, Rotation::deg90),
      std::invalid_argument);
  CHECK_NOTHROW(PairCopula(CopulaFamily::gumbel, {1.0}));
}
