#include <cmath>
#include <random>

#include "doctest.h"
#include "fermobius/asymptotics.hpp"
#include "fermobius/correlation.hpp"
#include "fermobius/errors.hpp"
#include "oracles.hpp"

using namespace fm;

namespace {

CouplingSet generic_l2() {
  return couplings_from_nonnegative(2, {cd(0.5, 0), cd(1, 0.3), cd(0.3, 0.5)}, {0, cd(0.4, 0.2), 0.2});
}

void check_matrix_invariants(const CorrelationMatrix& V) {
  const auto& M = V.V;
  CHECK((M - M.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  auto ev = es.eigenvalues();
  long n = ev.size();
  for (long k = 0; k < n; ++k) {
    CHECK(std::abs(ev(k)) <= 1 + 1e-8);
    CHECK(std::abs(ev(k) + ev(n - 1 - k)) < 1e-8);
  }
}

}  // namespace

TEST_CASE("symbol involution") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> T(-kPi, kPi);
  for (const auto& c : {generic_l2(), xydm_couplings(0, 1, 0.2), xydm_couplings(0.6, 0, 1.0), xydm_couplings(1, 0, 4)}) {
    int done = 0;
    while (done < 256) {
      double t = T(rng);
      if (std::abs(dispersion(c, t)) < 1e-6 || std::abs(dispersion(c, -t)) < 1e-6) continue;
      auto G = symbol(c, t).G;
      CHECK((G - G.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((G * G - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-10);
      ++done;
    }
  }
}

TEST_CASE("symbol cases") {
  auto xx = symbol(xydm_couplings(0, 0, 0), kPi / 4).G;
  CHECK(std::abs(std::abs(xx(0, 0)) - 1) < 1e-12);
  CHECK(std::abs(xx(0, 0) + xx(1, 1)) < 1e-12);
  CHECK(std::abs(xx(0, 1)) < 1e-12);

  auto dm = xydm_couplings(0, 1, 0);
  double t = -kPi / 2;  // inside the Dirac sea arc
  REQUIRE(dispersion(dm, t) < 0);
  auto G = symbol(dm, t).G;
  CHECK((G - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  auto G2 = symbol(dm, -t).G;
  CHECK((G2 + Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  try {
    symbol(dm, -kPi / 4);
    FAIL("no discontinuity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OnDiscontinuity);
  }
}

TEST_CASE("finite-chain correlations agree with a real-space BdG ground state") {
  for (const auto& c : {generic_l2(), xydm_couplings(0.7, 0.3, 1.1), xydm_couplings(0, 1, 0.4)}) {
    int N = 64, X = 12;
    auto ref = oracle::bdg_spectrum(c, N, X);
    auto nu = entanglement_spectrum(build_VX(c, single_interval(X), Mode::finite(N)));
    REQUIRE(nu.size() == ref.size());
    for (size_t k = 0; k < nu.size(); ++k) CHECK(std::abs(nu[k] - ref[k]) < 1e-10);
    // alpha < 1 is ill-conditioned for nu near 1: sqrt((1 - nu) / 2) turns 1e-16 into 1e-8
    CHECK(std::abs(renyi(nu, 0.5).S - oracle::renyi_entropy(ref, 0.5)) < 1e-6);
    for (double a : {1.0, 2.0}) CHECK(std::abs(renyi(nu, a).S - oracle::renyi_entropy(ref, a)) < 1e-10);
  }
}

TEST_CASE("correlation matrix invariants") {
  for (const auto& c : {generic_l2(), xydm_couplings(0, 0, 0.3), xydm_couplings(0, 1, 0.2)}) {
    check_matrix_invariants(build_VX(c, single_interval(30), Mode::thermo()));
    check_matrix_invariants(build_VX(c, make_subsystem({{1, 8}, {15, 30}}), Mode::thermo()));
    check_matrix_invariants(build_VX(c, single_interval(20), Mode::finite(200)));
  }
}

TEST_CASE("finite N converges to the thermodynamic limit for gapped chains") {
  auto c = couplings_from_nonnegative(2, {-1.5, cd(1, 0.2), cd(0.3, 0.1)}, {0, 0.6, cd(0.3, 0.05)});
  REQUIRE(classify(c).cls == CriticalityClass::Gapped);
  auto a = build_VX(c, single_interval(15), Mode::finite(4096)).V;
  auto b = build_VX(c, single_interval(15), Mode::thermo()).V;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single interval through the multi-interval path") {
  auto c = generic_l2();
  auto a = build_VX(c, single_interval(12), Mode::thermo()).V;
  auto b = build_VX(c, make_subsystem({{1, 12}}), Mode::thermo()).V;
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("product state and half-filled site") {
  auto ins = couplings_from_nonnegative(1, {-1.0, 0.0}, {0.0, 0.0});
  auto r = entropy(ins, single_interval(10), 2.0, Mode::thermo());
  for (double v : r.nu) CHECK(v == doctest::Approx(1.0));
  CHECK(std::abs(r.S) < 1e-12);
  CHECK(r.Z == doctest::Approx(1.0));

  auto xx = build_VX(xydm_couplings(0, 0, 0), single_interval(1), Mode::thermo());
  CHECK(xx.V.cwiseAbs().maxCoeff() < 1e-10);
  for (double a : {0.5, 1.0, 3.0}) CHECK(entropy(xydm_couplings(0, 0, 0), single_interval(1), a, Mode::thermo()).S == doctest::Approx(std::log(2.0)));
}

TEST_CASE("renyi arithmetic") {
  CHECK(renyi({0.5}, 2).S == doctest::Approx(-std::log(0.625)));
  auto r = renyi({0.0}, 3);
  CHECK(r.S == doctest::Approx(std::log(2.0)));
  CHECK(r.Z == doctest::Approx(std::pow(2.0, -2)));
  CHECK(renyi({1.0, 1.0}, 0.5).S == doctest::Approx(0.0));
  CHECK_THROWS_AS(renyi({0.3}, 0), Error);
  CHECK_THROWS_AS(renyi({1.1}, 2), Error);
}

TEST_CASE("gapped spectrum against a second eigensolver") {
  auto V = build_VX(xydm_couplings(1, 0, 4), single_interval(20), Mode::thermo());
  auto nu = entanglement_spectrum(V);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(V.V);
  std::vector<double> mags;
  for (long k = 0; k < ces.eigenvalues().size(); ++k) mags.push_back(std::abs(ces.eigenvalues()(k)));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  for (size_t k = 0; k < nu.size(); ++k) CHECK(std::abs(nu[k] - mags[2 * k]) < 1e-10);
  CHECK(nu[0] <= 1.0);
  for (size_t k = 1; k < nu.size(); ++k) CHECK(nu[k] <= nu[k - 1]);
}

TEST_CASE("critical XX at 100 sites is close to its asymptotic form") {
  double S = entropy(xydm_couplings(0, 0, 0), single_interval(100), 1.0, Mode::thermo()).S;
  ClosedFormParams p;
  CHECK(std::abs(S - closed_form(p, 100, 1.0)) < 1e-2);
}

TEST_CASE("entropy is continuous in the couplings in a gapped neighbourhood") {
  double base = entropy(xydm_couplings(0.8, 0, 3), single_interval(20), 2, Mode::thermo()).S;
  double prev = 1e9;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    double d = std::abs(entropy(xydm_couplings(0.8, 0, 3 + eps), single_interval(20), 2, Mode::thermo()).S - base);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("flow scan at zero boost is the direct entropy") {
  auto c = xydm_couplings(0, 0, 0.5);
  auto rows = entropy_flow_scan(c, {0.0}, 2.0, single_interval(30), Mode::thermo());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].S == doctest::Approx(entropy(c, single_interval(30), 2.0, Mode::thermo()).S).epsilon(1e-14));
  CHECK(rows[0].dS_numeric == 0.0);
}

TEST_CASE("gapped flow keeps the entropy") {
  auto rows = entropy_flow_scan(xydm_couplings(1, 0, 4), {-0.3, 0.0, 0.3}, 2.0, single_interval(40), Mode::thermo());
  for (const auto& r : rows) {
    CHECK(std::abs(r.dS_numeric) < 1e-6);
    CHECK(r.dS_predicted == 0.0);
  }
}
