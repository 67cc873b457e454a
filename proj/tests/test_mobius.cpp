#include <cmath>
#include <random>

#include "doctest.h"
#include "fermobius/errors.hpp"
#include "fermobius/mobius.hpp"

using namespace fm;

namespace {

MobiusMap random_sl2(std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  cd a(1 + 0.3 * U(rng), 0.3 * U(rng)), b(U(rng), U(rng)), c(U(rng), U(rng));
  cd d = (1.0 + b * c) / a;
  return make_mobius(a, b, c, d);
}

}  // namespace

TEST_CASE("boost fixed points and identity") {
  auto id = boost(0);
  CHECK(std::abs(id.a - 1.0) < 1e-15);
  CHECK(std::abs(id.b) < 1e-15);
  auto m = boost(0.3);
  CHECK(std::abs(map_point(m, 1.0).z - 1.0) < 1e-14);
  CHECK(std::abs(map_point(m, -1.0).z + 1.0) < 1e-14);
  CHECK(m.is_so11());
  auto sum = boost(0.2) * boost(0.45);
  auto ref = boost(0.65);
  CHECK(std::abs(sum.a - ref.a) + std::abs(sum.b - ref.b) + std::abs(sum.c - ref.c) < 1e-13);
}

TEST_CASE("determinant is enforced") {
  try {
    make_mobius(1.0, 1.0, 1.0, 1.0);
    FAIL("accepted a singular map");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("pole of the map is reported") {
  auto m = boost(0.4);
  cd pole = -m.d / m.c;
  try {
    map_point(m, pole);
    FAIL("no pole error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Pole);
  }
}

TEST_CASE("jacobian against finite differences") {
  auto m = boost(0.25);
  cd z(0, 1), h = 1e-6;
  cd fd = (map_point(m, z + h).z - map_point(m, z - h).z) / (2.0 * h);
  CHECK(std::abs(fd - map_point(m, z).jac) < 1e-8);
}

TEST_CASE("group law and jacobian cocycle") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int it = 0; it < 200; ++it) {
    auto m1 = random_sl2(rng), m2 = random_sl2(rng);
    cd z(U(rng), U(rng));
    auto p2 = map_point(m2, z);
    auto p1 = map_point(m1, p2.z);
    auto p12 = map_point(m1 * m2, z);
    CHECK(std::abs(p1.z - p12.z) < 1e-10 * std::max(1.0, std::abs(p12.z)));
    CHECK(std::abs(p1.jac * p2.jac - p12.jac) < 1e-10 * std::max(1.0, std::abs(p12.jac)));
  }
}

TEST_CASE("boosts preserve the unit circle with positive angular jacobian") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> T(-kPi, kPi), Z(-1, 1);
  for (int it = 0; it < 100; ++it) {
    auto m = boost(Z(rng));
    cd u = std::polar(1.0, T(rng));
    CHECK(std::abs(std::abs(map_point(m, u).z) - 1) < 1e-12);
    double J = angular_jacobian(m, u);
    CHECK(J > 0);
    cd dz = map_point(m, u).jac;
    CHECK(J == doctest::Approx(std::abs(dz)).epsilon(1e-12));
  }
}

TEST_CASE("XY flow of the couplings") {
  double g = 0.8, h = 3.0, z = 0.35;
  auto p = transform_xydm(z, g, 0, h);
  double den = (h / 2) * std::sinh(2 * z) + std::cosh(2 * z);
  CHECK(p.gamma == doctest::Approx(g / den));
  CHECK(p.h / 2 == doctest::Approx(((h / 2) * std::cosh(2 * z) + std::sinh(2 * z)) / den));

  auto q = transform_xydm(z, g, 0.4, 0);
  CHECK(q.gamma == doctest::Approx(g / std::cosh(2 * z)));
  CHECK(q.h == doctest::Approx(2 * std::tanh(2 * z)));
  CHECK(q.s == doctest::Approx(0.4 / std::cosh(2 * z)));

  // Ising line flows along itself
  double target = 0.5;
  auto r = transform_xydm(-0.5 * std::log(target), 1, 0, 2);
  CHECK(r.gamma == doctest::Approx(target));
  CHECK(r.h == doctest::Approx(2));

  auto c = transform_couplings(boost(z), xydm_couplings(g, 0, h));
  auto ref = xydm_couplings(p.gamma, 0, p.h);
  double scale = c.a(1).real();
  for (int l = -1; l <= 1; ++l) {
    CHECK(std::abs(c.a(l) / scale - ref.a(l)) < 1e-12);
    CHECK(std::abs(c.b(l) / scale - ref.b(l)) < 1e-12);
  }
}

TEST_CASE("transformed couplings keep their symmetries and move the roots") {
  auto c = couplings_from_nonnegative(2, {cd(-1.5, 0), cd(1, 0.2), cd(0.3, 0.1)}, {0, 0.1, cd(0.1, 0.05)});
  auto m = boost(0.1);
  auto t = transform_couplings(m, c);
  CHECK_NOTHROW(validate(t));
  CHECK(std::abs(t.a(0).imag()) < 1e-14);
  auto old_roots = spectral_curve(c).roots;
  auto new_roots = spectral_curve(t).roots;
  REQUIRE(old_roots.size() == new_roots.size());
  for (const auto& r : old_roots) {
    cd img = map_point(m, r.z).z;
    double best = 1e9;
    for (const auto& q : new_roots) best = std::min(best, std::abs(q.z - img));
    CHECK(best < 1e-8);
  }
  auto same = transform_couplings(boost(0), c);
  for (int l = -2; l <= 2; ++l) CHECK(std::abs(same.a(l) - c.a(l)) + std::abs(same.b(l) - c.b(l)) < 1e-13);
}

TEST_CASE("admissibility") {
  auto c = couplings_from_nonnegative(2, {cd(-1.5, 0), cd(1, 0.2), cd(0.3, 0.1)}, {0, 0.1, cd(0.1, 0.05)});
  auto sc = spectral_curve(c);
  CHECK(is_admissible(boost(0.4), sc).admissible);
  CHECK(is_admissible(boost(0), sc).admissible);
  auto rot = is_admissible(rotation(0.7), sc);
  CHECK_FALSE(rot.quartet_preserved);
  CHECK_FALSE(rot.admissible);
  try {
    transform_couplings(rotation(0.7), c);
    FAIL("rotation accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Admissibility);
  }
}

TEST_CASE("predicted shift") {
  CHECK(delta_alpha(1) == 0);
  CHECK(delta_alpha(2) == doctest::Approx(-1.0 / 16));
  CHECK(delta_alpha(0.5) == doctest::Approx(1.0 / 16));
  auto m = boost(0.3);
  CHECK(predicted_shift(2, m, classify(xydm_couplings(1, 0, 4)), 1).delta_S == 0);

  auto rep = classify(xydm_couplings(0, 0, 0.4));
  REQUIRE(rep.R == 2);
  double expect = 0;
  for (const auto& u : rep.u) expect += std::log(angular_jacobian(m, u));
  auto s = predicted_shift(2, m, rep, 1);
  CHECK(s.real);
  CHECK(s.delta_S == doctest::Approx(expect / 8).epsilon(1e-12));
}
