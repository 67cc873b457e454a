#include "fermobius/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fermobius/errors.hpp"
#include "fermobius/mobius.hpp"

namespace fm {

namespace {

// (z-a) sqrt((z-b)/(z-a)) from the two differences
cd fseg_d(cd za, cd zb) { return za * std::exp(0.5 * std::log(zb / za)); }

// za, zb: z - c.a and z - c.b (passed in when known more accurately than by subtraction)
cd factor(const Cut& c, cd z, cd za, cd zb) {
  if (!c.y_chart) return fseg_d(za, zb);
  return z * fseg_d(-za / (c.a * z), -zb / (c.b * z));
}

cd factor(const Cut& c, cd z) { return factor(c, z, z - c.a, z - c.b); }

double cross(cd a, cd b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(cd p1, cd p2, cd q1, cd q2) {
  double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

bool polylines_cross(const std::vector<cd>& P, const std::vector<cd>& Q) {
  for (size_t i = 0; i + 1 < P.size(); ++i)
    for (size_t j = 0; j + 1 < Q.size(); ++j)
      if (segments_cross(P[i], P[i + 1], Q[j], Q[j + 1])) return true;
  return false;
}

std::vector<cd> chart_points(const Cut& c, int n = 64) {
  cd A = c.y_chart ? 1.0 / c.a : c.a, B = c.y_chart ? 1.0 / c.b : c.b;
  std::vector<cd> pts(n + 1);
  for (int i = 0; i <= n; ++i) pts[i] = A + (B - A) * (double(i) / n);
  return pts;
}

// point where the segment u -> v meets the unit circle (u, v on opposite sides)
cd circle_hit(cd u, cd v) {
  cd d = v - u;
  double qa = std::norm(d), qb = 2 * (std::conj(u) * d).real(), qc = std::norm(u) - 1.0;
  double disc = std::sqrt(std::max(0.0, qb * qb - 4 * qa * qc));
  double t = (-qb + disc) / (2 * qa);
  if (t < 0 || t > 1) t = (-qb - disc) / (2 * qa);
  return u + std::clamp(t, 0.0, 1.0) * d;
}

double dist_to_segment(cd p, cd a, cd b) {
  cd d = b - a;
  double t = std::clamp(((p - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

QuadOptions period_quad() {
  QuadOptions q;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-12;
  return q;
}

// sin(pi t / 2) together with 1 + sin and 1 - sin free of cancellation
struct SinSub {
  double s, one_plus, one_minus, ds;
  explicit SinSub(double t) {
    double x = 0.25 * kPi * (t + 1.0);
    s = std::sin(0.5 * kPi * t);
    one_plus = 2.0 * std::sin(x) * std::sin(x);
    one_minus = 2.0 * std::cos(x) * std::cos(x);
    ds = 0.5 * kPi * std::cos(0.5 * kPi * t);
  }
};

// Point on a straight segment A -> B of a chart, p = anchor + off with the anchor the nearer end,
// so that z - x stays accurate for branch points x close to the segment.
struct ChartPoint {
  bool y_chart;
  cd anchor, off, p, z;
  ChartPoint(bool y, cd A, cd B, double t) : y_chart(y) {
    SinSub q(t);
    cd half = 0.5 * (B - A);
    if (t < 0) {
      anchor = A;
      off = half * q.one_plus;
    } else {
      anchor = B;
      off = -half * q.one_minus;
    }
    p = anchor + off;
    z = y_chart ? 1.0 / p : p;
  }
  cd minus(cd x) const {
    if (!y_chart) return (anchor - x) + off;
    return -x * ((anchor - 1.0 / x) + off) / p;
  }
  cd w_factor(const Cut& c) const { return factor(c, z, minus(c.a), minus(c.b)); }
};

// integral of z^k / w over the straight z-gap between cut j-1 (ending at a) and cut j (starting at b)
std::vector<cd> gap_integrals(const HyperellipticCurve& cv, int j) {
  std::vector<cd> out(cv.g);
  cd a = cv.z[2 * j - 1], b = cv.z[2 * j];
  cd half = 0.5 * (b - a);
  for (int k = 0; k < cv.g; ++k) {
    auto f = [&](double t) -> cd {
      ChartPoint cp(false, a, b, t);
      cd wv = 1.0;
      for (int r = 0; r <= cv.g; ++r) wv *= cp.w_factor(cv.cuts[r]);
      return std::pow(cp.z, k) / wv * half * SinSub(t).ds;
    };
    out[k] = integrate(f, -1.0, 0.0, period_quad()) + integrate(f, 0.0, 1.0, period_quad());
  }
  return out;
}

// Loop around cut r anticlockwise in its chart = twice the right-side boundary integral.
// On the right side of a -> b the own factor is -i (p-a) sqrt(|p-b|/|p-a|) = -i h cos(pi t/2),
// which cancels the Jacobian of the sine substitution.
std::vector<cd> loop_integrals(const HyperellipticCurve& cv, int r) {
  const Cut& own = cv.cuts[r];
  std::vector<cd> out(cv.g);
  cd A = own.y_chart ? 1.0 / own.a : own.a, B = own.y_chart ? 1.0 / own.b : own.b;
  for (int k = 0; k < cv.g; ++k) {
    auto f = [&](double t) -> cd {
      ChartPoint cp(own.y_chart, A, B, t);
      cd others = 1.0;
      for (int j = 0; j <= cv.g; ++j)
        if (j != r) others *= cp.w_factor(cv.cuts[j]);
      // own factor / (half * ds) = -i * (pi/2)^{-1}
      cd own_scaled = cd(0, -1) / (0.5 * kPi);
      if (own.y_chart) own_scaled /= cp.p;
      cd dz = own.y_chart ? -1.0 / (cp.p * cp.p) : cd(1.0);
      return 2.0 * std::pow(cp.z, k) / (own_scaled * others) * dz;
    };
    out[k] = integrate(f, -1.0, 0.0, period_quad()) + integrate(f, 0.0, 1.0, period_quad());
  }
  return out;
}

HyperellipticCurve make_ordered(const CouplingSet& c, const std::vector<cd>& inside, double pre_boost) {
  HyperellipticCurve cv;
  cv.L = c.L;
  cv.g = 2 * c.L - 1;
  cv.couplings = c;
  cv.pre_boost = pre_boost;
  int n = 2 * c.L;
  cv.z = inside;
  for (int j = n - 1; j >= 0; --j) cv.z.push_back(1.0 / inside[j]);
  LaurentData ld = build_laurent(c);
  for (cd z : cv.z) {
    cd tp = ld.theta(z), xi = ld.xi(z);
    cv.eps.push_back(std::abs(tp + xi) < std::abs(tp - xi) ? 1 : -1);
  }
  for (int r = 0; r <= cv.g; ++r) cv.cuts.push_back({cv.z[2 * r], cv.z[2 * r + 1], r >= c.L});
  return cv;
}

bool period_ok(const PeriodMatrix& pm) {
  double scale = std::max(1.0, pm.Pi.cwiseAbs().maxCoeff());
  return pm.asymmetry <= 1e-8 * scale && pm.min_imag_eig > 0;
}

}  // namespace

cd HyperellipticCurve::w(cd zz) const {
  cd r = 1.0;
  for (const Cut& c : cuts) r *= factor(c, zz);
  return r;
}

std::vector<std::string> curve_problems(const HyperellipticCurve& cv) {
  std::vector<std::string> out;
  // each cut sampled in its own chart: z inside the disc, y = 1/z outside it
  std::vector<std::vector<cd>> cp;
  for (const Cut& c : cv.cuts) cp.push_back(chart_points(c));
  for (size_t i = 0; i < cp.size(); ++i) {
    for (cd p : cp[i]) {
      if (std::abs(p) >= 1.0) {
        out.push_back("cut " + std::to_string(i) + " meets the unit circle");
        break;
      }
    }
    for (size_t j = i + 1; j < cp.size(); ++j)
      if (cv.cuts[i].y_chart == cv.cuts[j].y_chart && polylines_cross(cp[i], cp[j]))
        out.push_back("cuts " + std::to_string(i) + " and " + std::to_string(j) + " cross");
  }
  for (int j = 1; j <= cv.g; ++j) {
    cd a = cv.z[2 * j - 1], b = cv.z[2 * j];
    // interior of the gap split at the unit circle into runs, each in the chart of its side
    std::vector<std::pair<bool, std::vector<cd>>> runs;
    cd prev = a + (b - a) / 64.0;
    runs.push_back({std::abs(prev) > 1.0, {prev}});
    for (int i = 2; i < 64; ++i) {
      cd cur = a + (b - a) * (double(i) / 64);
      bool outside = std::abs(cur) > 1.0;
      if (outside != runs.back().first) {
        cd hit = circle_hit(prev, cur);
        runs.back().second.push_back(hit);
        runs.push_back({outside, {hit}});
      }
      runs.back().second.push_back(cur);
      prev = cur;
    }
    for (auto& [outside, pts] : runs)
      if (outside)
        for (cd& q : pts) q = 1.0 / q;
    for (size_t i = 0; i < cp.size(); ++i)
      for (const auto& [outside, pts] : runs)
        if (outside == cv.cuts[i].y_chart && polylines_cross(pts, cp[i])) {
          out.push_back("gap " + std::to_string(j) + " crosses cut " + std::to_string(i));
          break;
        }
    for (size_t i = 0; i < cv.z.size(); ++i) {
      if (int(i) == 2 * j - 1 || int(i) == 2 * j) continue;
      if (dist_to_segment(cv.z[i], a, b) < 1e-9 * std::max(1.0, std::abs(cv.z[i])))
        out.push_back("gap " + std::to_string(j) + " passes through a branch point");
    }
    for (int k = j + 1; k <= cv.g; ++k)
      if (segments_cross(a, b, cv.z[2 * k - 1], cv.z[2 * k]))
        out.push_back("gaps " + std::to_string(j) + " and " + std::to_string(k) + " cross");
  }
  return out;
}

PeriodMatrix period_matrix(const HyperellipticCurve& cv) {
  int g = cv.g;
  Eigen::MatrixXcd Am(g, g), Bm(g, g);
  std::vector<cd> bsum(g, 0.0);
  for (int r = 1; r <= g; ++r) {
    std::vector<cd> lp = loop_integrals(cv, r);
    std::vector<cd> gp = gap_integrals(cv, r);
    for (int k = 0; k < g; ++k) {
      bsum[k] += 2.0 * gp[k];
      Am(r - 1, k) = lp[k];
      Bm(r - 1, k) = bsum[k];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(Am);
  if (!lu.isInvertible()) throw Error(ErrorKind::Integration, "a-period matrix is singular");
  PeriodMatrix pm;
  pm.Pi = Bm * lu.inverse();
  pm.asymmetry = (pm.Pi - pm.Pi.transpose()).cwiseAbs().maxCoeff();
  Eigen::MatrixXd Y = 0.5 * (pm.Pi.imag() + pm.Pi.imag().transpose());
  pm.min_imag_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Y).eigenvalues().minCoeff();
  return pm;
}

ThetaCharacteristics characteristics(const HyperellipticCurve& cv) {
  int g = cv.g;
  ThetaCharacteristics ch;
  ch.mu.resize(g);
  ch.nu.resize(g);
  ch.e.resize(g);
  for (int r = 1; r <= g; ++r) {
    ch.mu(r - 1) = 0.25 * (cv.eps[2 * r] + cv.eps[2 * r + 1]);
    double s = 0.0;
    for (int j = 1; j <= 2 * r; ++j) s += cv.eps[j];
    ch.nu(r - 1) = 0.25 * s;
    ch.e(r - 1) = r >= cv.L ? 1.0 : 0.0;
  }
  return ch;
}

HyperellipticCurve build_curve(const CouplingSet& c0, const CurveOptions& opt) {
  validate(c0);
  if (!c0.parity() || !c0.pc())
    throw Error(ErrorKind::Unsupported, "theta asymptotics need real couplings A_l, B_l");
  CouplingSet c = c0;
  SpectralCurve sc = spectral_curve(c, opt.tol);
  double boost_used = 0.0;
  if (sc.zeros_at_origin > 0) {
    c = transform_couplings(boost(opt.pre_boost), c0, opt.tol);
    for (auto& x : c.A) x = x.real();
    for (auto& x : c.B) x = x.real();
    sc = spectral_curve(c, opt.tol);
    boost_used = opt.pre_boost;
    if (sc.zeros_at_origin > 0) throw Error(ErrorKind::Degeneracy, "P(z) keeps roots at the origin after pre-boost");
  }
  if (!sc.on_circle.empty()) throw Error(ErrorKind::Degeneracy, "root of P(z) on the unit circle (critical chain)");
  for (const Root& r : sc.roots)
    if (r.multiplicity > 1) throw Error(ErrorKind::Degeneracy, "P(z) has a multiple root");
  std::vector<cd> ins;
  for (int i : sc.inside) ins.push_back(sc.roots[i].z);
  int n = 2 * c.L;
  if (int(ins.size()) != n) throw Error(ErrorKind::Structure, "expected 2L roots inside the unit circle");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(ins[i] - ins[j]) < 1e-10) throw Error(ErrorKind::Degeneracy, "coincident branch points");

  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  auto transported = [&](const std::vector<int>& q) {
    std::vector<cd> o;
    for (int i : q) o.push_back(ins[i]);
    return o;
  };
  auto score = [&](const std::vector<int>& q) {
    double s = 0.0;
    for (int r = 0; r < c.L; ++r) s += std::abs(ins[q[2 * r]] - ins[q[2 * r + 1]]);
    for (int j = 1; j < c.L; ++j) s += 0.5 * std::abs(ins[q[2 * j - 1]] - ins[q[2 * j]]);
    return s;
  };
  if (opt.pinch_hint) {
    cd hint = *opt.pinch_hint;
    if (boost_used != 0.0) hint = map_point(boost(boost_used), hint).z;
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(ins[i] - hint) < std::abs(ins[best] - hint)) best = i;
    bool real = std::abs(ins[best].imag()) < 1e-12;
    int conj = -1;
    if (!real) {
      for (int i = 0; i < n; ++i)
        if (i != best && (conj < 0 || std::abs(ins[i] - std::conj(ins[best])) < std::abs(ins[conj] - std::conj(ins[best]))))
          conj = i;
    }
    std::erase_if(perms, [&](const std::vector<int>& q) {
      return q[n - 1] != best || (conj >= 0 && q[n - 2] != conj);
    });
  }
  std::stable_sort(perms.begin(), perms.end(),
                   [&](const auto& x, const auto& y) { return score(x) < score(y); });
  if (!opt.inside_order.empty()) {
    if (int(opt.inside_order.size()) != n) throw Error(ErrorKind::Shape, "inside_order needs 2L points");
    std::vector<int> q;
    for (cd target : opt.inside_order) {
      int best = -1;
      for (int i = 0; i < n; ++i)
        if (std::find(q.begin(), q.end(), i) == q.end() && (best < 0 || std::abs(ins[i] - target) < std::abs(ins[best] - target)))
          best = i;
      q.push_back(best);
    }
    perms.insert(perms.begin(), q);
  }
  std::string last = "no ordering tried";
  for (const auto& q : perms) {
    HyperellipticCurve cv = make_ordered(c, transported(q), boost_used);
    auto probs = curve_problems(cv);
    if (!probs.empty()) {
      last = probs.front();
      continue;
    }
    PeriodMatrix pm;
    try {
      pm = period_matrix(cv);
    } catch (const Error& e) {
      last = e.what();
      continue;
    }
    if (period_ok(pm)) return cv;
    std::ostringstream os;
    os << "period matrix asymmetry " << pm.asymmetry << ", min Im eigenvalue " << pm.min_imag_eig;
    last = os.str();
  }
  throw Error(ErrorKind::Ordering, "no admissible root ordering found (" + last + ")");
}

CurveData curve_data(const CouplingSet& c, const CurveOptions& opt) {
  CurveData d;
  d.curve = build_curve(c, opt);
  d.period = period_matrix(d.curve);
  if (!period_ok(d.period)) throw Error(ErrorKind::NumericalConsistency, "period matrix is not a Riemann matrix");
  d.ch = characteristics(d.curve);
  return d;
}

}  // namespace fm
