#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "zomirror/check.hpp"
#include "zomirror/mirror.hpp"

using namespace zomirror;
using testing_support::golden_min;
using testing_support::random_vector;

TEST_CASE("dgf_value examples") {
  CHECK(dgf_value(MirrorGeometry(4), Vector::Zero(4)) == 0.0);
  CHECK(dgf_value(MirrorGeometry(1), Vector::Ones(1)) ==
        doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-14));
  std::mt19937_64 rng(1);
  const MirrorGeometry geo(7);
  for (int k = 0; k < 100; ++k) {
    Vector x = random_vector(rng, 7, -10, 10);
    CHECK(dgf_value(geo, x) == dgf_value(geo, -x));
    CHECK(dgf_value(geo, x) >= 0.0);
  }
}

TEST_CASE("mirror_map examples") {
  CHECK(mirror_map(MirrorGeometry(3), Vector::Zero(3)).isZero(0.0));
  CHECK(mirror_map(MirrorGeometry(1), Vector::Ones(1))[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  std::mt19937_64 rng(2);
  const MirrorGeometry geo(9);
  for (int k = 0; k < 100; ++k) {
    Vector x = random_vector(rng, 9, -10, 10);
    CHECK((mirror_map(geo, -x) + mirror_map(geo, x)).isZero(0.0));
  }
}

TEST_CASE("mirror_map is the gradient of the dgf") {
  std::mt19937_64 rng(3);
  const MirrorGeometry geo(5);
  auto f = [&](const Vector& x) { return dgf_value(geo, x); };
  for (int k = 0; k < 50; ++k) {
    Vector x = random_vector(rng, 5, -3, 3);
    Vector fd = testing_support::central_difference(f, x, 1e-6);
    Vector g = mirror_map(geo, x);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(fd[i] - g[i]) < 1e-6);
  }
}

TEST_CASE("inverse_mirror_map") {
  CHECK(inverse_mirror_map(MirrorGeometry(2), Vector::Zero(2)).isZero(0.0));
  CHECK(inverse_mirror_map(MirrorGeometry(1), Vector::Constant(1, std::log(2.0)))[0] ==
        doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(4);
  for (int d : {1, 10, 1000}) {
    const MirrorGeometry geo(d);
    Vector x = random_vector(rng, d, -10, 10);
    CHECK((inverse_mirror_map(geo, mirror_map(geo, x)) - x).cwiseAbs().maxCoeff() <= 1e-10);
  }

  const MirrorGeometry geo(10);
  Vector big = Vector::Zero(10);
  big[3] = geo.max_dual_magnitude() * 1.01;
  CHECK_THROWS_AS(inverse_mirror_map(geo, big), NumericError);
  big[3] = -geo.max_dual_magnitude() * 0.99;
  CHECK(std::isfinite(inverse_mirror_map(geo, big)[3]));
}

TEST_CASE("bregman examples") {
  const MirrorGeometry g1(1);
  CHECK(bregman(g1, Vector::Ones(1), Vector::Zero(1)) ==
        doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-14));
  std::mt19937_64 rng(5);
  const MirrorGeometry geo(6);
  for (int k = 0; k < 100; ++k) {
    Vector x = random_vector(rng, 6, -4, 4);
    CHECK(bregman(geo, x, x) == doctest::Approx(0.0));
  }
}

TEST_CASE("bregman matches the definition and stays accurate for close points") {
  std::mt19937_64 rng(7);
  for (int d : {1, 3, 40}) {
    const MirrorGeometry geo(d);
    for (int k = 0; k < 200; ++k) {
      const Vector x = random_vector(rng, d, -3, 3), y = random_vector(rng, d, -3, 3);
      const double naive = dgf_value(geo, y) - dgf_value(geo, x) - mirror_map(geo, x).dot(y - x);
      CHECK(bregman(geo, y, x) == doctest::Approx(naive).epsilon(1e-9));
    }
  }
  // Second-order expansion: B = delta^2 / (2 (|x| + 1/d)) + O(delta^3).
  const MirrorGeometry g4(4);
  for (double x : {-2.0, 0.0, 1e-6, 0.3}) {
    const double delta = 1e-7;
    const double expect = delta * delta / (2 * (std::abs(x) + 0.25));
    CHECK(bregman(g4, Vector::Constant(4, x + delta), Vector::Constant(4, x)) ==
          doctest::Approx(4 * expect).epsilon(1e-5));
  }
}

TEST_CASE("bregman strong convexity bound in l1") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> scale(0.0, 3.0);
  int violations = 0;
  for (int d : {1, 5, 100}) {
    const MirrorGeometry geo(d);
    for (int k = 0; k < 2000; ++k) {
      const double s = std::pow(10.0, scale(rng) - 2);
      Vector x = random_vector(rng, d, -s, s), y = random_vector(rng, d, -s, s);
      if (k % 3 == 0) x.setZero();
      const double lhs = bregman(geo, y, x);
      const double rhs =
          std::pow((y - x).lpNorm<1>(), 2) / (2 * (std::max(x.lpNorm<1>(), y.lpNorm<1>()) + 1));
      if (lhs < rhs * (1 - 1e-12)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("lambert_w0") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lambert_w0(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-14));
  for (double z : {1e-300, 1e-8, 0.3, 10.0, 1e6, 1e100, 1e300, -0.2, -0.36787944117144}) {
    const double w = lambert_w0(z);
    CHECK(w >= -1.0);
    CHECK(std::abs(w * std::exp(w) - z) <= 1e-12 * std::max(1.0, std::abs(z)));
  }
  CHECK(lambert_w0(-1.0 / std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK_THROWS_AS(lambert_w0(-0.4), std::domain_error);
  CHECK_THROWS_AS(lambert_w0(std::nan("")), std::domain_error);
}

TEST_CASE("lambert_w0_exp matches lambert_w0 and extends past overflow") {
  for (double s : {-5.0, 0.0, 1.0, 50.0, 600.0}) {
    CHECK(lambert_w0_exp(s) == doctest::Approx(lambert_w0(std::exp(s))).epsilon(1e-13));
  }
  for (double s : {700.0, 1000.0, 1e5}) {
    const double w = lambert_w0_exp(s);
    // w + ln w = s
    CHECK(std::abs(w + std::log(w) - s) <= 1e-12 * s);
  }
}

TEST_CASE("prox_composite examples") {
  const auto U = FeasibleSet::unconstrained();
  std::mt19937_64 rng(7);
  const MirrorGeometry geo(4);
  Vector xt = random_vector(rng, 4, -2, 2);
  CHECK((prox_composite(geo, xt, Vector::Zero(4), 1.3, {}, U) - xt).cwiseAbs().maxCoeff() <
        1e-14);

  const MirrorGeometry g1(1);
  const Vector g = Vector::Constant(1, -std::log(2.0));
  CHECK(prox_composite(g1, Vector::Zero(1), g, 1.0, {std::log(2.0), 0.0}, U)[0] == 0.0);
  const double w = prox_composite(g1, Vector::Zero(1), g, 1.0, {0.0, 1.0}, U)[0];
  CHECK(w == doctest::Approx(lambert_w0(2 * std::exp(1.0)) - 1).epsilon(1e-13));
  CHECK(w == doctest::Approx(0.3749).epsilon(1e-4));
  // ln(x + 1) + x = ln 2 at the solution
  CHECK(std::log(w + 1) + w == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  auto f = [&](double y) { return prox_coordinate_objective(g1, 0.0, g[0], 1.0, {0.0, 1.0}, y); };
  CHECK(std::abs(golden_min(f, -10, 10) - w) < 1e-8);

  CHECK_THROWS_AS(prox_composite(g1, Vector::Zero(1), g, 0.0, {}, U), std::invalid_argument);
  CHECK_THROWS_AS(prox_composite(g1, Vector::Zero(1), g, -1.0, {}, U), std::invalid_argument);
  CHECK_THROWS_AS(prox_composite(g1, Vector::Zero(1), Vector::Constant(1, -1e5), 1.0, {}, U),
                  NumericError);
}

TEST_CASE("prox_composite optimality certificate") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> Uf(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const int d = 1 + int(Uf(rng) * 50);
    const MirrorGeometry geo(d);
    const ElasticNet reg(k % 2 ? Uf(rng) : 0.0, k % 3 ? Uf(rng) : 0.0);
    const double eta = 0.3 + 5 * Uf(rng);
    FeasibleSet set = FeasibleSet::unconstrained();
    if (k % 4 >= 2) set = FeasibleSet::box(Vector::Constant(d, -0.5), Vector::Constant(d, 2.0));
    const Vector xt = set.clamp(random_vector(rng, d, -2, 2));
    const Vector g = random_vector(rng, d, -3, 3);
    const Vector p = prox_composite(geo, xt, g, eta, reg, set);
    CHECK(set.contains(p));
    for (int i = 0; i < d; ++i) {
      auto obj = [&](double y) { return prox_coordinate_objective(geo, xt[i], g[i], eta, reg, y); };
      const double base = obj(p[i]);
      for (double step : {-1e-4, 1e-4}) {
        const double y = p[i] + step;
        if (set.is_box() && (y < set.as_box().lo[i] || y > set.as_box().hi[i])) continue;
        CHECK(obj(y) >= base - 1e-9);
      }
    }
  }
}

TEST_CASE("prox_composite matches golden-section search") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> Uf(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int d = 1 + int(Uf(rng) * 20);
    const MirrorGeometry geo(d);
    const ElasticNet reg(k % 2 ? 0.5 * Uf(rng) : 0.0, k % 3 ? Uf(rng) : 0.0);
    const double eta = 0.5 + 5 * Uf(rng);
    const bool boxed = k % 4 >= 2;
    FeasibleSet set = boxed ? FeasibleSet::box(Vector::Constant(d, -1.0), Vector::Constant(d, 3.0))
                            : FeasibleSet::unconstrained();
    const Vector xt = set.clamp(random_vector(rng, d, -2, 2));
    const Vector g = random_vector(rng, d, -2, 2);
    const Vector p = prox_composite(geo, xt, g, eta, reg, set);
    for (int i = 0; i < d; ++i) {
      auto obj = [&](double y) { return prox_coordinate_objective(geo, xt[i], g[i], eta, reg, y); };
      // Small d and a large dual shift can push the minimiser far out, so the
      // unconstrained bracket grows with the answer and the error is relative.
      const double reach = 4.0 * std::max(10.0, std::abs(p[i]));
      const double ref = boxed ? golden_min(obj, -1.0, 3.0) : golden_min(obj, -reach, reach);
      worst = std::max(worst, std::abs(ref - p[i]) / std::max(1.0, std::abs(ref)));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("l1 closed form agrees with the Lambert branch as gamma2 -> 0") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> Uf(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const int d = 1 + int(Uf(rng) * 30);
    const MirrorGeometry geo(d);
    const double g1 = Uf(rng), eta = 0.5 + 3 * Uf(rng);
    const double xt = 4 * Uf(rng) - 2, g = 4 * Uf(rng) - 2;
    const double a = prox_coordinate(geo, xt, g, eta, {g1, 0.0});
    const double b = prox_coordinate(geo, xt, g, eta, {g1, 1e-12});
    CHECK(std::abs(a - b) <= 1e-6);
  }
}

TEST_CASE("library golden-section helper and prox check") {
  CHECK(golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, -1, 1) ==
        doctest::Approx(0.3).epsilon(1e-9));
  CHECK(golden_section_minimize([](double x) { return x; }, -1, 1) ==
        doctest::Approx(-1.0).epsilon(1e-9));
  const ProxCheckReport r = prox_bruteforce_check(50, 3);
  CHECK(r.trials == 50);
  CHECK(r.passed());
}

TEST_CASE("geometry rejects non-positive dimension") {
  CHECK_THROWS_AS(MirrorGeometry(0), std::invalid_argument);
}
