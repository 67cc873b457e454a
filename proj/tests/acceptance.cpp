// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "fermobius/asymptotics.hpp"
#include "fermobius/cli.hpp"
#include "fermobius/correlation.hpp"
#include "fermobius/errors.hpp"
#include "fermobius/mobius.hpp"
#include "fermobius/riemann.hpp"

using namespace fm;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double kappa(double a) { return (a + 1) / (12 * a); }

double S_thermo(const CouplingSet& c, long X, double a) { return entropy(c, single_interval(X), a, Mode::thermo()).S; }

cd exact_log_det(const CouplingSet& c, long X, cd lam) {
  auto V = build_VX(c, single_interval(X), Mode::thermo());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(V.V);
  cd s = 0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) s += std::log(lam - es.eigenvalues()(i));
  return s;
}

double wrapped(cd d) { return std::abs(cd(d.real(), std::remainder(d.imag(), 2 * kPi))); }

std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

Outcome gapped_invariance() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (auto [g, h] : std::vector<std::pair<double, double>>{{1, 4}, {0.5, 3}, {2, 5}}) {
    auto c = xydm_couplings(g, 0, h);
    double S0 = S_thermo(c, 100, 2);
    for (double z : {0.1, 0.2, 0.3, 0.4, 0.5}) worst = std::max(worst, std::abs(S_thermo(transform_couplings(boost(z), c), 100, 2) - S0));
  }
  double t = seconds_since(t0);
  o.require(worst < 1e-4, fmt("max |S'_2 - S_2| = %.2e", worst));
  o.require(t < 120, fmt("%.1f s", t));
  return o;
}

// Flow along a boost grid, compared with the Jacobian prediction where the pinching
// (or Fermi) angle sits in the window [pi/4, 3pi/4].
Outcome critical_flow(const CouplingSet& c, const std::vector<double>& zetas, bool use_v, double limit_s) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto rows = entropy_flow_scan(c, zetas, 2.0, single_interval(400), Mode::thermo());
  double worst = 0;
  int used = 0;
  for (const auto& r : rows) {
    const auto& pts = use_v ? r.report.v : r.report.u;
    bool inside = !pts.empty();
    for (cd p : pts) {
      double a = std::abs(std::arg(p));
      if (!use_v && (a < kPi / 4 - 1e-9 || a > 3 * kPi / 4 + 1e-9)) inside = false;
    }
    if (!inside) continue;
    ++used;
    worst = std::max(worst, std::abs(r.dS_numeric - r.dS_predicted));
  }
  double t = seconds_since(t0);
  o.require(used >= 5, fmt("%.0f grid points in the window", used));
  o.require(worst < 5e-2, fmt("max |dS - prediction| = %.2e", worst));
  o.require(t < limit_s, fmt("%.1f s", t));
  return o;
}

Outcome parity_preserving() {
  std::vector<double> z;
  for (int k = -4; k <= 4; ++k) z.push_back(0.11 * k);
  auto c = cli::parity_preserving_l2();
  auto rep = classify(c);
  Outcome o = critical_flow(c, z, false, 600);
  o.require(rep.cls == CriticalityClass::CriticalParityPreservingVacuum && rep.R == 2, "L = 2 chain with two pinchings");
  return o;
}

Outcome dirac_sea() {
  std::vector<double> z;
  for (int k = -4; k <= 4; ++k) z.push_back(0.125 * k);
  auto c = cli::dirac_sea_l2();
  auto rep = classify(c);
  Outcome o = critical_flow(c, z, true, 600);
  o.require(rep.cls == CriticalityClass::CriticalDiracSea && rep.R == 0 && rep.Q == 4, "L = 2 chain with R = 0, Q = 4");
  return o;
}

Outcome crit_xx() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  ClosedFormParams p;
  double d = std::abs(S_thermo(xydm_couplings(0, 0, 0), 500, 2) - closed_form(p, 500, 2));
  double t = seconds_since(t0);
  o.require(d < 1e-3, fmt("|S - formula| = %.2e", d));
  o.require(t < 60, fmt("%.1f s", t));
  return o;
}

Outcome ising_line() {
  Outcome o;
  double S[2];
  int i = 0;
  for (double g : {1.0, 0.5}) {
    ClosedFormParams p;
    p.model = ClosedFormModel::IsingLine;
    p.gamma = g;
    S[i] = S_thermo(xydm_couplings(g, 0, 2), 500, 2);
    double d = std::abs(S[i] - closed_form(p, 500, 2));
    o.require(d < 5e-3, fmt("gamma=%.1f: |S - formula| = %.2e", g, d));
    ++i;
  }
  double d = std::abs((S[1] - S[0]) - kappa(2) * std::log(0.5));
  o.require(d < 2e-3, fmt("gamma shift error %.2e", d));
  return o;
}

Outcome xx_dm() {
  Outcome o;
  for (auto [s, h] : std::vector<std::pair<double, double>>{{1, 0}, {1, 1}}) {
    ClosedFormParams p;
    p.model = ClosedFormModel::XXDM;
    p.s = s;
    p.h = h;
    double d = std::abs(S_thermo(xydm_couplings(0, s, h), 500, 2) - closed_form(p, 500, 2));
    o.require(d < 5e-3, fmt("(s,h)=(%.0f,%.0f): |S - formula| = %.2e", s, h, d));
  }
  // boosted closed form minus the original equals the Jacobian product at the Fermi points
  double worst = 0;
  for (auto [s, h] : std::vector<std::pair<double, double>>{{1, 0}, {1, 1}}) {
    auto rep = classify(xydm_couplings(0, s, h));
    for (double z : {-0.4, -0.1, 0.2, 0.5}) {
      auto q = transform_xydm(z, 0, s, h);
      ClosedFormParams a, b;
      a.model = b.model = ClosedFormModel::XXDM;
      a.s = s, a.h = h, b.s = q.s, b.h = q.h;
      for (double al : {0.5, 2.0, 3.0}) {
        double lhs = closed_form(b, 500, al) - closed_form(a, 500, al);
        worst = std::max(worst, std::abs(lhs - predicted_shift(al, boost(z), rep, 1).delta_S));
      }
    }
  }
  o.require(worst < 1e-10, fmt("Jacobian identity residual %.1e", worst));
  return o;
}

Outcome theta_determinant() {
  Outcome o;
  std::vector<std::pair<std::string, CouplingSet>> chains = {
      {"g=1", xydm_couplings(0.5, 0, 2.1)},
      {"g=3", couplings_from_nonnegative(2, {-1.5, 1, 0.3}, {0, 0.1, 0.1})}};
  for (const auto& [name, c] : chains) {
    auto d = curve_data(c);
    o.require(d.curve.g == (name == "g=1" ? 1 : 3), name + " genus");
    for (cd lam : {cd(0, 2), cd(1.5, 0.5)}) {
      double prev = 1e9, last = 0;
      bool decreasing = true;
      for (long X : {10, 20, 40}) {
        cd exact = exact_log_det(c, X, lam);
        double rel = wrapped(exact - dx_lambda(d, lam, double(X))) / std::abs(exact);
        decreasing = decreasing && rel < prev;
        prev = last = rel;
      }
      o.require(last < 1e-3 && decreasing,
                name + fmt(" lambda=%.1f%+.1fi rel err at 40: %.1e", lam.real(), lam.imag(), last));
    }
    double diff = std::abs(entropy_contour(d, 2) - S_thermo(c, 100, 2));
    o.require(diff < 1e-3, name + fmt(" contour vs spectral S_2: %.1e", diff));
  }
  return o;
}

Outcome genus1_period() {
  Outcome o;
  auto c = xydm_couplings(0.5, 0, 3);
  auto d = curve_data(c);
  std::vector<double> r;
  for (cd z : d.curve.z) r.push_back(z.real());
  double e = std::abs(d.period.Pi(0, 0) - genus1_tau(r));
  o.require(e < 1e-8, fmt("|Pi - iK'/K| = %.1e", e));
  double worst = 0;
  for (auto [g, h] : std::vector<std::pair<double, double>>{{0.5, 3}, {1, 4}, {2, 5}}) {
    auto ci = xydm_couplings(g, 0, h);
    auto di = curve_data(ci);
    for (double z : {0.1, 0.3, 0.5}) {
      CurveOptions opt;
      for (int i = 0; i < 2 * di.curve.L; ++i) opt.inside_order.push_back(map_point(boost(z), di.curve.z[i]).z);
      auto dz = curve_data(transform_couplings(boost(z), ci), opt);
      worst = std::max(worst, (dz.period.Pi - di.period.Pi).cwiseAbs().maxCoeff());
    }
  }
  o.require(worst < 1e-6, fmt("boost change of Pi %.1e", worst));
  return o;
}

Outcome pinching() {
  Outcome o;
  std::vector<CouplingSet> fam;
  for (double dl : {1e-4, 3e-5, 1e-5, 3e-6, 1e-6}) fam.push_back(xydm_couplings(0.5, 0, 2 + dl));
  auto r = pinch_limits_unit(fam, 2.0);
  double target = -kappa(2);
  double rel = std::abs(r.slope - target) / std::abs(target);
  o.require(rel < 0.02, fmt("unit-circle slope %.5f vs %.5f (%.2f%%)", r.slope, target, 100 * rel));

  std::vector<double> G = mul({-0.8, 1}, {1.3, 1});
  double sigma = 0.6;
  double reduced = entropy_contour(curve_data(couplings_from_fplus(G)), 2.0);
  std::vector<CouplingSet> out;
  for (double e : {1e-3, 1e-4, 1e-5}) out.push_back(couplings_from_fplus(mul(mul({-(1 / sigma + e), 1}, {-sigma, 1}), G)));
  auto S = pinch_limits_outside(out, 2.0);
  double d = std::abs(S.back() - reduced);
  o.require(d < 1e-3, fmt("outside limit vs reduced genus %.1e", d));
  return o;
}

Outcome multi_interval() {
  Outcome o;
  auto c = xydm_couplings(0, 0, 0);
  double direct = entropy(c, make_subsystem({{1, 100}, {201, 300}}), 2.0, Mode::thermo()).S;
  double product = multiinterval_S([&](double l) { return S_thermo(c, std::lround(l), 2.0); }, {1, 101, 201, 301});
  double d = std::abs(direct - product);
  o.require(d < 5e-2, fmt("|direct - product| = %.1e", d));
  bool exact = true;
  for (int P = 1; P <= 8; ++P) {
    int s = 0;
    for (int t = 1; t <= 2 * P; ++t)
      for (int u = t + 1; u <= 2 * P; ++u) s += interval_sign(t) * interval_sign(u);
    exact = exact && s == -P && exponent_sum(P) == -P;
  }
  o.require(exact, "exponent sum = -P for P = 1..8");
  return o;
}

// Property suites, each timed separately.
Outcome properties() {
  Outcome o;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-1, 1), T(-kPi, kPi);
  auto timed = [&](const std::string& name, const std::function<bool()>& f) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = f();
    } catch (const std::exception& e) {
      ok = false;
    }
    double t = seconds_since(t0);
    o.require(ok && t < 60, name + fmt(" (%.1f s)", t));
  };
  std::vector<CouplingSet> chains = {xydm_couplings(1, 0, 4), xydm_couplings(0, 0, 0.5), xydm_couplings(0, 1, 0.2),
                                     cli::dirac_sea_l2(), cli::parity_preserving_l2()};

  timed("symbol involution", [&] {
    for (const auto& c : chains) {
      int n = 0;
      while (n < 256) {
        double t = T(rng);
        if (std::abs(dispersion(c, t)) < 1e-6 || std::abs(dispersion(c, -t)) < 1e-6) continue;
        auto G = symbol(c, t).G;
        if ((G * G - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-10) return false;
        if ((G - G.adjoint()).cwiseAbs().maxCoeff() > 1e-10) return false;
        ++n;
      }
    }
    return true;
  });
  timed("correlation Hermiticity and pairing", [&] {
    for (const auto& c : chains)
      for (const auto& sub : {single_interval(40), make_subsystem({{1, 10}, {25, 40}})}) {
        auto V = build_VX(c, sub, Mode::thermo()).V;
        if ((V - V.adjoint()).cwiseAbs().maxCoeff() > 1e-10) return false;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(V);
        auto ev = es.eigenvalues();
        long n = ev.size();
        for (long k = 0; k < n; ++k)
          if (std::abs(ev(k) + ev(n - 1 - k)) > 1e-8 || std::abs(ev(k)) > 1 + 1e-8) return false;
      }
    return true;
  });
  timed("Riemann matrix positivity", [&] {
    for (const auto& c : {xydm_couplings(0.5, 0, 3), xydm_couplings(2, 0, 5), couplings_from_nonnegative(2, {-1.5, 1, 0.4}, {0, 0.6, 0.3}),
                          couplings_from_nonnegative(2, {-1.5, 1, 0.3}, {0, 0.1, 0.1})}) {
      auto d = curve_data(c);
      const auto& Pi = d.period.Pi;
      if ((Pi - Pi.transpose()).cwiseAbs().maxCoeff() > 1e-8) return false;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Pi.imag());
      if (es.eigenvalues().minCoeff() <= 0) return false;
    }
    return true;
  });
  timed("theta evenness and quasi-periodicity", [&] {
    auto d = curve_data(couplings_from_nonnegative(2, {-1.5, 1, 0.4}, {0, 0.6, 0.3}));
    const auto& Pi = d.period.Pi;
    int g = d.curve.g;
    VectorXd zero = VectorXd::Zero(g);
    for (int it = 0; it < 20; ++it) {
      VectorXcd s(g);
      for (int i = 0; i < g; ++i) s(i) = cd(0.3 * U(rng), 0.05 * U(rng));
      if (std::abs(theta(zero, zero, s, Pi) - theta(zero, zero, -s, Pi)) > 1e-12) return false;
      VectorXcd m(g);
      for (int i = 0; i < g; ++i) m(i) = double(std::lround(U(rng)));
      cd lhs = theta(d.ch.mu, d.ch.nu, s + Pi * m, Pi, 1e-14);
      cd ph = -cd(0, kPi) * (m.transpose() * Pi * m)(0) - 2.0 * cd(0, kPi) * m.dot(s + d.ch.nu.cast<cd>());
      if (std::abs(lhs - std::exp(ph) * theta(d.ch.mu, d.ch.nu, s, Pi, 1e-14)) > 1e-8 * std::abs(lhs)) return false;
    }
    return true;
  });
  timed("group law and Jacobian cocycle", [&] {
    for (int it = 0; it < 1000; ++it) {
      auto rnd = [&] {
        cd a(1 + 0.3 * U(rng), 0.3 * U(rng)), b(U(rng), U(rng)), c(U(rng), U(rng));
        return make_mobius(a, b, c, (1.0 + b * c) / a);
      };
      auto m1 = rnd(), m2 = rnd();
      cd z(U(rng), U(rng));
      auto p2 = map_point(m2, z);
      auto p1 = map_point(m1, p2.z);
      auto p12 = map_point(m1 * m2, z);
      if (std::abs(p1.z - p12.z) > 1e-10 * std::max(1.0, std::abs(p12.z))) return false;
      if (std::abs(p1.jac * p2.jac - p12.jac) > 1e-10 * std::max(1.0, std::abs(p12.jac))) return false;
    }
    return true;
  });
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, gapped_invariance}, {2, parity_preserving}, {3, dirac_sea},        {4, crit_xx},
      {5, ising_line},        {6, xx_dm},             {7, theta_determinant}, {8, genus1_period},
      {9, pinching},          {10, multi_interval},   {11, properties}};
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
