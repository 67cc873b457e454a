#include "fermobius/chain_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "fermobius/errors.hpp"

namespace fm {

bool CouplingSet::parity() const {
  return std::all_of(A.begin(), A.end(), [](cd a) { return std::abs(a.imag()) <= 1e-14 * (1 + std::abs(a)); });
}

bool CouplingSet::pc() const {
  return std::all_of(B.begin(), B.end(), [](cd b) { return std::abs(b.imag()) <= 1e-14 * (1 + std::abs(b)); });
}

void validate(const CouplingSet& c, double tol) {
  if (c.L < 1) throw Error(ErrorKind::ConstraintViolation, "L must be >= 1");
  size_t n = 2 * c.L + 1;
  if (c.A.size() != n || c.B.size() != n)
    throw Error(ErrorKind::ConstraintViolation, "coupling vectors must have length 2L+1");
  double scale = 0.0;
  for (size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(c.A[i]), std::abs(c.B[i])});
  double t = tol * std::max(1.0, scale);
  for (int l = 0; l <= c.L; ++l) {
    if (std::abs(c.a(-l) - std::conj(c.a(l))) > t) {
      std::ostringstream os;
      os << "Hermiticity A_{-l} = conj(A_l) fails at l = " << l;
      throw Error(ErrorKind::ConstraintViolation, os.str());
    }
    if (std::abs(c.b(-l) + c.b(l)) > t) {
      std::ostringstream os;
      os << "antisymmetry B_{-l} = -B_l fails at l = " << l;
      throw Error(ErrorKind::ConstraintViolation, os.str());
    }
  }
}

CouplingSet make_couplings(int L, std::vector<cd> A, std::vector<cd> B) {
  CouplingSet c{L, std::move(A), std::move(B)};
  validate(c);
  return c;
}

CouplingSet couplings_from_nonnegative(int L, const std::vector<cd>& A0, const std::vector<cd>& B0) {
  if (L < 1) throw Error(ErrorKind::ConstraintViolation, "L must be >= 1");
  if (A0.size() != size_t(L + 1) || B0.size() != size_t(L + 1))
    throw Error(ErrorKind::ConstraintViolation, "expected L+1 coefficients for l = 0..L");
  if (std::abs(A0[0].imag()) > 1e-12)
    throw Error(ErrorKind::ConstraintViolation, "Hermiticity requires real A_0 (index 0)");
  if (std::abs(B0[0]) > 1e-12)
    throw Error(ErrorKind::ConstraintViolation, "antisymmetry requires B_0 = 0 (index 0)");
  CouplingSet c;
  c.L = L;
  c.A.assign(2 * L + 1, 0.0);
  c.B.assign(2 * L + 1, 0.0);
  for (int l = 0; l <= L; ++l) {
    c.A[L + l] = A0[l];
    c.A[L - l] = std::conj(A0[l]);
    c.B[L + l] = B0[l];
    c.B[L - l] = -B0[l];
  }
  c.A[L] = A0[0].real();
  c.B[L] = 0.0;
  return c;
}

CouplingSet couplings_from_fplus(const std::vector<double>& f) {
  if (f.size() < 3 || f.size() % 2 == 0)
    throw Error(ErrorKind::ConstraintViolation, "z^L (Theta + Xi) needs 2L+1 coefficients, L >= 1");
  int L = int(f.size() - 1) / 2;
  std::vector<cd> A(L + 1), B(L + 1);
  for (int l = 0; l <= L; ++l) {
    A[l] = 0.5 * (f[L + l] + f[L - l]);
    B[l] = 0.5 * (f[L + l] - f[L - l]);
  }
  return couplings_from_nonnegative(L, A, B);
}

CouplingSet xydm_couplings(double gamma, double s, double h) {
  return couplings_from_nonnegative(1, {cd(-h, 0), cd(1, s)}, {0.0, gamma});
}

cd Laurent::operator()(cd z) const {
  cd acc = 0.0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
  return acc * std::pow(z, lo);
}

Laurent operator+(const Laurent& p, const Laurent& q) {
  Laurent r;
  r.lo = std::min(p.lo, q.lo);
  int hi = std::max(p.hi(), q.hi());
  r.c.resize(hi - r.lo + 1);
  for (int k = r.lo; k <= hi; ++k) r.c[k - r.lo] = p.coeff(k) + q.coeff(k);
  return r;
}

Laurent operator*(cd s, const Laurent& p) {
  Laurent r = p;
  for (auto& x : r.c) x *= s;
  return r;
}

Laurent operator-(const Laurent& p, const Laurent& q) { return p + cd(-1.0) * q; }

Laurent operator*(const Laurent& p, const Laurent& q) {
  Laurent r;
  r.lo = p.lo + q.lo;
  r.c.assign(p.c.size() + q.c.size() - 1, 0.0);
  for (size_t i = 0; i < p.c.size(); ++i)
    for (size_t j = 0; j < q.c.size(); ++j) r.c[i + j] += p.c[i] * q.c[j];
  return r;
}

Laurent invert_argument(const Laurent& p) {
  Laurent r;
  r.lo = -p.hi();
  r.c.assign(p.c.rbegin(), p.c.rend());
  return r;
}

Laurent conj_coeffs(const Laurent& p) {
  Laurent r = p;
  for (auto& x : r.c) x = std::conj(x);
  return r;
}

LaurentData build_laurent(const CouplingSet& c) {
  validate(c);
  LaurentData d;
  d.theta = Laurent{-c.L, c.A};
  d.xi = Laurent{-c.L, c.B};
  Laurent inv = invert_argument(d.theta);
  d.theta_plus = cd(0.5) * (d.theta + inv);
  d.theta_minus = cd(0.5) * (d.theta - inv);
  return d;
}

namespace {

struct BoundaryValues {
  double tp, tm_reflected;  // Theta+(e^{i th}), Theta-(e^{-i th})
  cd xi;
};

BoundaryValues boundary(const CouplingSet& c, double th) {
  double tp = 0.0, tm = 0.0, scale = 0.0;
  cd xi = 0.0;
  double tp_im = 0.0, tm_im = 0.0;
  for (int l = -c.L; l <= c.L; ++l) {
    cd e = std::polar(1.0, l * th);
    cd a = c.a(l), ar = c.a(-l);
    cd p = 0.5 * (a + ar) * e;
    cd m = 0.5 * (a - ar) * std::conj(e);
    tp += p.real();
    tp_im += p.imag();
    tm += m.real();
    tm_im += m.imag();
    xi += c.b(l) * e;
    scale += std::abs(a);
  }
  double t = 1e-10 * std::max(1.0, scale);
  if (std::abs(tp_im) > t || std::abs(tm_im) > t)
    throw Error(ErrorKind::NumericalConsistency, "Theta+- boundary values are not real");
  return {tp, tm, xi};
}

}  // namespace

double dispersion(const CouplingSet& c, double theta) {
  BoundaryValues bv = boundary(c, theta);
  double rad = bv.tp * bv.tp + std::norm(bv.xi);
  if (rad < -1e-12) throw Error(ErrorKind::NumericalConsistency, "negative radicand in dispersion");
  return std::sqrt(std::max(rad, 0.0)) + bv.tm_reflected;
}

GroundStateSpec diagonalize(const CouplingSet& c, int N) {
  validate(c);
  if (N <= 2 * c.L) throw Error(ErrorKind::Domain, "chain length N must exceed 2L");
  GroundStateSpec g;
  g.N = N;
  g.lambda.resize(N);
  cd shift = 0.0;
  double sum_abs = 0.0, scale = 0.0;
  for (int k = 0; k < N; ++k) {
    double th = 2.0 * kPi * k / N;
    g.lambda[k] = dispersion(c, th);
    if (g.lambda[k] < 0) g.dirac_sea.push_back(k);
    sum_abs += std::abs(g.lambda[k]);
    cd z = std::polar(1.0, th);
    for (int l = -c.L; l <= c.L; ++l) shift += c.a(l) * std::pow(z, l);
  }
  for (auto a : c.A) scale += std::abs(a);
  shift *= 0.5;
  if (std::abs(shift.imag()) > 1e-10 * std::max(1.0, scale * N))
    throw Error(ErrorKind::NumericalConsistency, "energy shift is not real");
  g.energy_shift = shift.real();
  g.ground_energy = g.energy_shift - 0.5 * sum_abs;
  return g;
}

cd poly_eval(const std::vector<cd>& p, cd z) {
  cd acc = 0.0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
  return acc;
}

std::vector<cd> poly_roots(const std::vector<cd>& p_in) {
  std::vector<cd> p = p_in;
  while (!p.empty() && p.back() == cd(0.0)) p.pop_back();
  int n = static_cast<int>(p.size()) - 1;
  if (n < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cd> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::vector<cd> dp(n);
  for (int i = 1; i <= n; ++i) dp[i - 1] = double(i) * p[i];
  for (auto& z : roots) {
    for (int it = 0; it < 4; ++it) {
      cd f = poly_eval(p, z), d = poly_eval(dp, z);
      if (d == cd(0.0)) break;
      cd trial = z - f / d;
      if (std::abs(poly_eval(p, trial)) < std::abs(f)) z = trial;
      else break;
    }
  }
  return roots;
}

std::vector<cd> poly_roots(const std::vector<double>& p) {
  return poly_roots(std::vector<cd>(p.begin(), p.end()));
}

std::vector<double> p_coefficients(const CouplingSet& c) {
  LaurentData d = build_laurent(c);
  Laurent prod = d.theta_plus * d.theta_plus - d.xi * conj_coeffs(d.xi);
  double scale = 0.0;
  for (auto x : prod.c) scale = std::max(scale, std::abs(x));
  std::vector<double> p(4 * c.L + 1, 0.0);
  for (int k = -2 * c.L; k <= 2 * c.L; ++k) {
    cd v = prod.coeff(k);
    if (std::abs(v.imag()) > 1e-10 * std::max(scale, 1e-300))
      throw Error(ErrorKind::NumericalConsistency, "P(z) has non-real coefficients");
    p[k + 2 * c.L] = v.real();
  }
  return p;
}

double SpectralCurve::eval_abs(cd z) const {
  cd acc = 0.0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
  return std::abs(acc);
}

namespace {

std::vector<Root> cluster(const std::vector<cd>& zs, double tol) {
  std::vector<Root> out;
  std::vector<int> used(zs.size(), 0);
  for (size_t i = 0; i < zs.size(); ++i) {
    if (used[i]) continue;
    std::vector<size_t> members{i};
    used[i] = 1;
    for (size_t k = 0; k < members.size(); ++k) {
      for (size_t j = 0; j < zs.size(); ++j) {
        if (used[j]) continue;
        cd zk = zs[members[k]];
        if (std::abs(zs[j] - zk) <= tol * std::max(1.0, std::abs(zk))) {
          used[j] = 1;
          members.push_back(j);
        }
      }
    }
    cd mean = 0.0;
    for (auto m : members) mean += zs[m];
    out.push_back({mean / double(members.size()), int(members.size())});
  }
  return out;
}

cd horner(const std::vector<double>& p, cd z) {
  cd acc = 0.0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
  return acc;
}

double horner_mag(const std::vector<double>& p, double r) {
  double acc = 0.0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * r + std::abs(p[i]);
  return acc;
}

std::vector<double> derivative(const std::vector<double>& p) {
  std::vector<double> d;
  for (size_t k = 1; k < p.size(); ++k) d.push_back(double(k) * p[k]);
  return d;
}

// A root of multiplicity m is a simple root of P^{(m-1)}; Newton there recovers it to full
// precision where the companion matrix only resolves it to eps^{1/m}.
bool polish_multiple(const std::vector<double>& p, int m, cd& z) {
  std::vector<double> d = p;
  for (int k = 1; k < m; ++k) d = derivative(d);
  std::vector<double> dd = derivative(d);
  cd x = z;
  for (int it = 0; it < 60; ++it) {
    cd f = horner(d, x), fp = horner(dd, x);
    if (fp == 0.0) return false;
    cd step = f / fp;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  std::vector<double> q = p;
  for (int k = 0; k < m; ++k) {
    if (std::abs(horner(q, x)) > 1e-14 * horner_mag(q, std::abs(x))) return false;
    q = derivative(q);
  }
  z = x;
  return true;
}

// Merges nearby roots that are numerically one multiple root and polishes multiple roots.
void merge_multiple(const std::vector<double>& p, std::vector<Root>& roots, double radius) {
  for (auto& r : roots)
    if (r.multiplicity > 1) polish_multiple(p, r.multiplicity, r.z);
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t i = 0; i < roots.size() && !merged; ++i) {
      for (size_t j = i + 1; j < roots.size() && !merged; ++j) {
        if (std::abs(roots[i].z - roots[j].z) > radius * std::max(1.0, std::abs(roots[i].z))) continue;
        int m = roots[i].multiplicity + roots[j].multiplicity;
        cd z = (double(roots[i].multiplicity) * roots[i].z + double(roots[j].multiplicity) * roots[j].z) / double(m);
        if (!polish_multiple(p, m, z)) continue;
        roots[i] = {z, m};
        roots.erase(roots.begin() + j);
        merged = true;
      }
    }
  }
}

int find_match(const std::vector<Root>& roots, cd target, int mult, double tol) {
  int best = -1;
  double bd = 1e300;
  for (size_t j = 0; j < roots.size(); ++j) {
    if (roots[j].multiplicity != mult) continue;
    double d = std::abs(roots[j].z - target) / std::max(1.0, std::abs(target));
    if (d < bd) {
      bd = d;
      best = int(j);
    }
  }
  return bd <= tol ? best : -1;
}

}  // namespace

SpectralCurve spectral_curve(const CouplingSet& c, const Tolerances& tol) {
  SpectralCurve sc;
  sc.p = p_coefficients(c);
  double norm = 0.0;
  for (double x : sc.p) norm = std::max(norm, std::abs(x));
  if (norm == 0.0) throw Error(ErrorKind::Structure, "P(z) vanishes identically");
  int lo = 0, hi = int(sc.p.size()) - 1;
  while (lo < hi && std::abs(sc.p[lo]) < tol.trim * norm) ++lo;
  while (hi > lo && std::abs(sc.p[hi]) < tol.trim * norm) --hi;
  sc.zeros_at_origin = lo;
  sc.zeros_at_infinity = int(sc.p.size()) - 1 - hi;
  sc.effective_degree = hi;
  std::vector<double> trimmed(sc.p.begin() + lo, sc.p.begin() + hi + 1);
  std::vector<cd> zs = poly_roots(trimmed);
  sc.roots = cluster(zs, tol.cluster);
  merge_multiple(trimmed, sc.roots, 1e-4);
  for (auto& r : sc.roots) {
    double mag = 0.0;
    for (size_t k = 0; k < sc.p.size(); ++k) mag += std::abs(sc.p[k]) * std::pow(std::abs(r.z), double(k));
    if (sc.eval_abs(r.z) > 1e-6 * mag)
      throw Error(ErrorKind::NumericalConsistency, "root residual too large");
  }
  if (sc.zeros_at_origin != sc.zeros_at_infinity)
    throw Error(ErrorKind::Structure, "roots at the origin and at infinity do not pair under inversion");
  std::vector<int> assigned(sc.roots.size(), -1);
  for (size_t i = 0; i < sc.roots.size(); ++i) {
    const Root& r = sc.roots[i];
    int jc = find_match(sc.roots, std::conj(r.z), r.multiplicity, tol.pairing);
    int ji = find_match(sc.roots, 1.0 / r.z, r.multiplicity, tol.pairing);
    if (jc < 0 || ji < 0)
      throw Error(ErrorKind::Structure, "quartet pairing failed: roots not closed under conjugation/inversion");
    if (assigned[i] >= 0) continue;
    std::vector<int> orbit{int(i)};
    for (int j : {jc, ji, find_match(sc.roots, 1.0 / std::conj(r.z), r.multiplicity, tol.pairing)}) {
      if (j >= 0 && std::find(orbit.begin(), orbit.end(), j) == orbit.end()) orbit.push_back(j);
    }
    int q = int(sc.quartets.size());
    for (int j : orbit) assigned[j] = q;
    sc.quartets.push_back(orbit);
  }
  for (size_t i = 0; i < sc.roots.size(); ++i) {
    double d = std::abs(sc.roots[i].z) - 1.0;
    if (std::abs(d) < tol.circle) sc.on_circle.push_back(int(i));
    else if (d < 0) sc.inside.push_back(int(i));
    else sc.outside.push_back(int(i));
  }
  return sc;
}

const char* to_string(CriticalityClass k) {
  switch (k) {
    case CriticalityClass::Gapped: return "Gapped";
    case CriticalityClass::CriticalParityPreservingVacuum: return "CriticalParityPreservingVacuum";
    case CriticalityClass::CriticalDiracSea: return "CriticalDiracSea";
  }
  return "?";
}

std::vector<double> fermi_angles(const CouplingSet& c, double tol_zero) {
  const int n = 4096;
  auto sgn = [&](double th) {
    double l = dispersion(c, th);
    return l > tol_zero ? 1 : (l < -tol_zero ? -1 : 0);
  };
  std::vector<double> th(n);
  std::vector<int> s(n);
  for (int k = 0; k < n; ++k) {
    th[k] = -kPi + 2.0 * kPi * (k + 0.5) / n;
    s[k] = sgn(th[k]);
  }
  std::vector<double> out;
  // walk the periodic grid, bracketing each strict sign change (zeros skipped)
  int start = -1;
  for (int k = 0; k < n; ++k)
    if (s[k] != 0) {
      start = k;
      break;
    }
  if (start < 0) return out;
  int prev = start;
  for (int step = 1; step <= n; ++step) {
    int k = (start + step) % n;
    if (s[k] == 0) continue;
    if (s[k] != s[prev]) {
      double a = th[prev], b = th[k];
      if (b < a) b += 2.0 * kPi;
      double la = dispersion(c, a);
      for (int it = 0; it < 80; ++it) {
        double m = 0.5 * (a + b);
        double lm = dispersion(c, m);
        if ((lm > 0) == (la > 0)) {
          a = m;
          la = lm;
        } else {
          b = m;
        }
      }
      double r = 0.5 * (a + b);
      if (r > kPi) r -= 2.0 * kPi;
      out.push_back(r);
    }
    prev = k;
  }
  std::sort(out.begin(), out.end());
  return out;
}

CriticalityReport classify(const CouplingSet& c, const Tolerances& tol) {
  validate(c);
  CriticalityReport rep;
  SpectralCurve sc = spectral_curve(c, tol);
  for (int i : sc.on_circle) {
    const Root& r = sc.roots[i];
    if (r.multiplicity % 2 != 0)
      throw Error(ErrorKind::Structure, "root on the unit circle with odd multiplicity");
    cd u = r.z / std::abs(r.z);
    // inside a Dirac-sea arc the symbol is +-I and the double root is not a pinching
    double th = std::arg(u);
    if (dispersion(c, th) < -tol.zero || dispersion(c, -th) < -tol.zero) continue;
    rep.u.push_back(u);
  }
  std::sort(rep.u.begin(), rep.u.end(), [](cd a, cd b) { return std::arg(a) < std::arg(b); });
  std::vector<double> f = fermi_angles(c, tol.zero);
  std::vector<double> vs = f;
  for (double t : f) {
    double m = -t;
    bool dup = std::any_of(vs.begin(), vs.end(), [&](double x) { return std::abs(x - m) < 1e-9; });
    if (!dup) vs.push_back(m);
  }
  std::sort(vs.begin(), vs.end());
  for (double t : vs) rep.v.push_back(std::polar(1.0, t));
  // Dirac intervals: arcs between consecutive Fermi angles where Lambda < 0
  for (size_t i = 0; i < f.size(); ++i) {
    double a = f[i], b = (i + 1 < f.size()) ? f[i + 1] : f[0] + 2.0 * kPi;
    double mid = 0.5 * (a + b);
    if (dispersion(c, mid) < 0) rep.dirac_intervals.push_back({a, b > kPi ? b - 2.0 * kPi : b});
  }
  rep.R = int(rep.u.size());
  rep.Q = int(rep.v.size());
  if (!rep.dirac_intervals.empty()) rep.cls = CriticalityClass::CriticalDiracSea;
  else if (!rep.u.empty()) rep.cls = CriticalityClass::CriticalParityPreservingVacuum;
  else rep.cls = CriticalityClass::Gapped;
  return rep;
}

std::pair<double, double> fermi_points_xydm(double gamma, double s, double h) {
  double d = s * s - gamma * gamma;
  if (!(d > 0)) throw Error(ErrorKind::Domain, "outside region A: s^2 - gamma^2 > 0 violated");
  if (!(0.25 * h * h - d < 1)) throw Error(ErrorKind::Domain, "outside region A: (h/2)^2 - s^2 + gamma^2 < 1 violated");
  double root = std::sqrt(d * (d + 1 - 0.25 * h * h));
  // +h/2: the zeros of sqrt((h - 2cos)^2 + 4g^2 sin^2) + 2s sin
  double c1 = (0.5 * h + root) / (d + 1), c2 = (0.5 * h - root) / (d + 1);
  double sign = s > 0 ? -1.0 : 1.0;
  return {sign * std::acos(std::clamp(c1, -1.0, 1.0)), sign * std::acos(std::clamp(c2, -1.0, 1.0))};
}

}  // namespace fm
