#include "fermobius/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fermobius/errors.hpp"

namespace fm {

bool MobiusMap::is_so11(double tol) const {
  for (cd x : {a, b, c, d})
    if (std::abs(x.imag()) > tol) return false;
  return std::abs(a - d) <= tol && std::abs(b - c) <= tol && a.real() > 0 &&
         std::abs(det() - 1.0) <= tol;
}

bool MobiusMap::preserves_circle(double tol) const {
  // z -> (az+b)/(cz+d) keeps |z| = 1 iff d = +-conj(a), c = +-conj(b)
  for (double s : {1.0, -1.0}) {
    double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(d - s * std::conj(a)) <= tol * scale && std::abs(c - s * std::conj(b)) <= tol * scale)
      return true;
  }
  return false;
}

MobiusMap operator*(const MobiusMap& m1, const MobiusMap& m2) {
  return {m1.a * m2.a + m1.b * m2.c, m1.a * m2.b + m1.b * m2.d,
          m1.c * m2.a + m1.d * m2.c, m1.c * m2.b + m1.d * m2.d};
}

MobiusMap make_mobius(cd a, cd b, cd c, cd d) {
  MobiusMap m{a, b, c, d};
  if (std::abs(m.det() - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "Mobius map needs ad - bc = 1, got " << m.det();
    throw Error(ErrorKind::Domain, os.str());
  }
  return m;
}

MobiusMap boost(double zeta) {
  double ch = std::cosh(zeta), sh = std::sinh(zeta);
  return {ch, sh, sh, ch};
}

MobiusMap rotation(double phi) {
  return {std::polar(1.0, 0.5 * phi), 0.0, 0.0, std::polar(1.0, -0.5 * phi)};
}

PointImage map_point(const MobiusMap& m, cd z) {
  cd den = m.c * z + m.d;
  double scale = std::abs(m.c * z) + std::abs(m.d);
  if (std::abs(den) <= 1e-14 * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "point " << z << " is a pole of the map";
    throw Error(ErrorKind::Pole, os.str());
  }
  return {(m.a * z + m.b) / den, 1.0 / (den * den)};
}

double angular_jacobian(const MobiusMap& m, cd u) {
  if (std::abs(std::abs(u) - 1.0) > 1e-10)
    throw Error(ErrorKind::Domain, "angular Jacobian needs a unit-modulus point");
  PointImage p = map_point(m, u);
  cd r = u / p.z * p.jac;
  if (std::abs(r.imag()) > 1e-10 * std::abs(r) || r.real() <= 0)
    throw Error(ErrorKind::NumericalConsistency, "angular Jacobian is not real positive; map does not preserve the circle");
  return r.real();
}

AdmissibilityReport is_admissible(const MobiusMap& m, const SpectralCurve& curve, const Tolerances& tol) {
  AdmissibilityReport rep;
  rep.side_preserved = true;
  auto side = [&](cd z, bool& undecided) {
    double d = std::abs(z) - 1.0;
    undecided = std::abs(d) >= tol.circle && std::abs(d) < 100 * tol.circle;
    if (std::abs(d) < tol.circle) return 0;
    return d < 0 ? -1 : 1;
  };
  std::vector<cd> images;
  for (const Root& r : curve.roots) {
    PointImage p;
    try {
      p = map_point(m, r.z);
    } catch (const Error&) {
      rep.side_preserved = false;
      rep.reason = "root mapped to infinity";
      return rep;
    }
    rep.moved_roots.push_back(p.z);
    for (int k = 0; k < r.multiplicity; ++k) images.push_back(p.z);
    bool u1 = false, u2 = false;
    int s0 = side(r.z, u1), s1 = side(p.z, u2);
    if (u1 || u2) rep.indeterminate = true;
    if (s0 != s1 && rep.side_preserved) {
      rep.side_preserved = false;
      std::ostringstream os;
      os << "root " << r.z << " changes side (image " << p.z << ")";
      rep.reason = os.str();
    }
  }
  // zeros at the origin and at infinity move to b/d and a/c
  if (curve.zeros_at_origin > 0 && (std::abs(m.b) > 1e-14 || std::abs(m.c) > 1e-14)) {
    if (std::abs(m.d) < 1e-14 || std::abs(m.c) < 1e-14 || !(std::abs(m.b / m.d) < 1.0) || !(std::abs(m.a / m.c) > 1.0)) {
      rep.side_preserved = false;
      if (rep.reason.empty()) rep.reason = "roots at 0 or infinity change side";
    } else {
      for (int k = 0; k < curve.zeros_at_origin; ++k) {
        images.push_back(m.b / m.d);
        images.push_back(m.a / m.c);
      }
    }
  }
  rep.quartet_preserved = true;
  for (cd z : images) {
    for (cd target : {std::conj(z), 1.0 / z}) {
      double best = 1e300;
      for (cd w : images) best = std::min(best, std::abs(w - target) / std::max(1.0, std::abs(target)));
      if (best > tol.pairing) {
        rep.quartet_preserved = false;
        if (rep.reason.empty()) {
          std::ostringstream os;
          os << "image root " << z << " has no conjugation/inversion partner";
          rep.reason = os.str();
        }
      }
    }
  }
  rep.admissible = rep.side_preserved && rep.quartet_preserved && !rep.indeterminate;
  if (rep.indeterminate && rep.reason.empty()) rep.reason = "root too close to the unit circle to decide";
  return rep;
}

namespace {

// coefficients of (p0 + p1 z)^n
std::vector<cd> binomial_power(cd p0, cd p1, int n) {
  std::vector<cd> out{1.0};
  for (int k = 0; k < n; ++k) {
    std::vector<cd> next(out.size() + 1, 0.0);
    for (size_t i = 0; i < out.size(); ++i) {
      next[i] += out[i] * p0;
      next[i + 1] += out[i] * p1;
    }
    out = std::move(next);
  }
  return out;
}

// F'(z') = (-c z' + a)^{2L} F(m^-1 z') on a degree-2L polynomial
std::vector<cd> spin_action(const MobiusMap& m, const std::vector<cd>& f) {
  int n = int(f.size()) - 1;
  std::vector<cd> out(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    if (f[k] == cd(0.0)) continue;
    std::vector<cd> num = binomial_power(-m.b, m.d, k);
    std::vector<cd> den = binomial_power(m.a, -m.c, n - k);
    for (size_t i = 0; i < num.size(); ++i)
      for (size_t j = 0; j < den.size(); ++j) out[i + j] += f[k] * num[i] * den[j];
  }
  return out;
}

}  // namespace

CouplingSet transform_couplings(const MobiusMap& m, const CouplingSet& c, const Tolerances& tol) {
  validate(c);
  if (!m.preserves_circle())
    throw Error(ErrorKind::Admissibility, "coupling transport needs a circle-preserving map");
  SpectralCurve sc = spectral_curve(c, tol);
  AdmissibilityReport rep = is_admissible(m, sc, tol);
  if (!rep.admissible) throw Error(ErrorKind::Admissibility, "map is not admissible: " + rep.reason);
  CouplingSet out;
  out.L = c.L;
  out.A = spin_action(m, c.A);
  out.B = spin_action(m, c.B);
  // phase gauge: make A'_0 real (trivial for real maps)
  cd a0 = out.A[c.L];
  if (std::abs(a0) > 0 && std::abs(a0.imag()) > 1e-15 * std::abs(a0)) {
    cd ph = std::conj(a0) / std::abs(a0);
    for (auto& x : out.A) x *= ph;
    for (auto& x : out.B) x *= ph;
  }
  double scale = 0.0;
  for (auto x : out.A) scale = std::max(scale, std::abs(x));
  for (auto x : out.B) scale = std::max(scale, std::abs(x));
  validate(out, 1e-10);
  // symmetrize away rounding
  for (int l = 0; l <= c.L; ++l) {
    cd ap = 0.5 * (out.a(l) + std::conj(out.a(-l)));
    cd bp = 0.5 * (out.b(l) - out.b(-l));
    out.A[c.L + l] = ap;
    out.A[c.L - l] = std::conj(ap);
    out.B[c.L + l] = bp;
    out.B[c.L - l] = -bp;
  }
  out.A[c.L] = out.A[c.L].real();
  out.B[c.L] = 0.0;
  for (auto& x : out.A)
    if (std::abs(x.imag()) < 1e-15 * scale) x = x.real();
  for (auto& x : out.B)
    if (std::abs(x.imag()) < 1e-15 * scale) x = x.real();
  return out;
}

XYDM transform_xydm(double zeta, double gamma, double s, double h) {
  double den = 0.5 * h * std::sinh(2 * zeta) + std::cosh(2 * zeta);
  if (std::abs(den) < 1e-14) throw Error(ErrorKind::FlowSingularity, "flow denominator vanishes");
  return {gamma / den, s / den, 2.0 * (0.5 * h * std::cosh(2 * zeta) + std::sinh(2 * zeta)) / den};
}

double delta_alpha(double alpha) {
  if (!(alpha > 0)) throw Error(ErrorKind::Domain, "alpha must be positive");
  return (1.0 / alpha - alpha) / 24.0;
}

namespace {

cd log_jac(const MobiusMap& m, cd u, bool& real) {
  PointImage p = map_point(m, u);
  if (std::abs(std::abs(u) - 1.0) < 1e-10 && std::abs(std::abs(p.z) - 1.0) < 1e-10) {
    cd r = u / p.z * p.jac;
    if (std::abs(r.imag()) < 1e-10 * std::abs(r) && r.real() > 0) return std::log(r.real());
  }
  real = false;
  return std::log(p.jac);
}

}  // namespace

ShiftPrediction predicted_shift(double alpha, const MobiusMap& m, const std::vector<cd>& u,
                                const std::vector<cd>& v, int P) {
  if (P < 1) throw Error(ErrorKind::Domain, "interval count must be >= 1");
  double da = delta_alpha(alpha);
  ShiftPrediction out;
  cd lsum = 0.0;
  for (cd x : u) lsum += 2.0 * double(P) * log_jac(m, x, out.real);
  for (cd x : v) lsum += double(P) * log_jac(m, x, out.real);
  // Delta_alpha / (1 - alpha) = (1 + alpha) / (24 alpha), finite at alpha = 1
  double k = (1.0 + alpha) / (24.0 * alpha);
  out.z_factor = std::exp(da * lsum);
  out.delta_S = k * lsum.real();
  if (out.real && std::abs(out.z_factor.imag()) > 1e-12 * std::abs(out.z_factor))
    throw Error(ErrorKind::NumericalConsistency, "Jacobian factor of a circle-preserving map is not real");
  return out;
}

ShiftPrediction predicted_shift(double alpha, const MobiusMap& m, const CriticalityReport& rep, int P) {
  return predicted_shift(alpha, m, rep.u, rep.v, P);
}

}  // namespace fm
