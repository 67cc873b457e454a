#pragma once

#include <utility>
#include <vector>

#include "fermobius/numeric.hpp"

namespace fm {

// Couplings A_l, B_l for l = -L..L, stored at index l + L.
struct CouplingSet {
  int L = 0;
  std::vector<cd> A, B;

  cd a(int l) const { return A[l + L]; }
  cd b(int l) const { return B[l + L]; }
  bool parity() const;  // all A_l real
  bool pc() const;      // all B_l real
};

// Validates Hermiticity A_{-l} = conj(A_l) and antisymmetry B_{-l} = -B_l.
void validate(const CouplingSet& c, double tol = 1e-12);

// Full vectors (length 2L+1); validated.
CouplingSet make_couplings(int L, std::vector<cd> A, std::vector<cd> B);
// Only l = 0..L given; negative indices follow from the symmetry relations.
CouplingSet couplings_from_nonnegative(int L, const std::vector<cd>& A0, const std::vector<cd>& B0);
// Real chain whose z^L (Theta + Xi) is the polynomial sum_k f_k z^k of degree 2L.
CouplingSet couplings_from_fplus(const std::vector<double>& f);
CouplingSet xydm_couplings(double gamma, double s, double h);

struct Laurent {
  int lo = 0;             // exponent of c[0]
  std::vector<cd> c;

  int hi() const { return lo + static_cast<int>(c.size()) - 1; }
  cd operator()(cd z) const;
  cd coeff(int k) const { return (k < lo || k > hi()) ? cd(0.0) : c[k - lo]; }
};

Laurent operator+(const Laurent& p, const Laurent& q);
Laurent operator-(const Laurent& p, const Laurent& q);
Laurent operator*(const Laurent& p, const Laurent& q);
Laurent operator*(cd s, const Laurent& p);
Laurent invert_argument(const Laurent& p);  // p(1/z)
Laurent conj_coeffs(const Laurent& p);      // conj(p(conj z))

struct LaurentData {
  Laurent theta, xi, theta_plus, theta_minus;
};

LaurentData build_laurent(const CouplingSet& c);

// Lambda(theta) = sqrt(Theta+(e^{i theta})^2 + |Xi(e^{i theta})|^2) + Theta-(e^{-i theta}).
double dispersion(const CouplingSet& c, double theta);

struct GroundStateSpec {
  int N = 0;
  std::vector<double> lambda;   // Lambda(theta_k), theta_k = 2 pi k / N
  std::vector<int> dirac_sea;   // modes with Lambda < 0
  double energy_shift = 0.0;
  double ground_energy = 0.0;
};

GroundStateSpec diagonalize(const CouplingSet& c, int N);

struct Tolerances {
  double circle = 1e-8;
  double cluster = 1e-6;
  double pairing = 1e-6;
  double zero = 1e-9;
  double trim = 1e-13;
};

struct Root {
  cd z;
  int multiplicity = 1;
};

struct SpectralCurve {
  std::vector<double> p;                 // P(z) = sum_k p[k] z^k, degree 4L
  std::vector<Root> roots;               // finite nonzero roots, clustered
  std::vector<std::vector<int>> quartets;  // orbits under conjugation and inversion
  std::vector<int> inside, outside, on_circle;
  int zeros_at_origin = 0;
  int zeros_at_infinity = 0;
  int effective_degree = 0;

  double eval_abs(cd z) const;
};

std::vector<double> p_coefficients(const CouplingSet& c);
SpectralCurve spectral_curve(const CouplingSet& c, const Tolerances& tol = {});

enum class CriticalityClass { Gapped, CriticalParityPreservingVacuum, CriticalDiracSea };
const char* to_string(CriticalityClass k);

struct CriticalityReport {
  CriticalityClass cls = CriticalityClass::Gapped;
  std::vector<cd> u;                                 // pinchings, ascending angle
  std::vector<cd> v;                                 // Fermi points and opposites
  std::vector<std::pair<double, double>> dirac_intervals;
  int R = 0, Q = 0;
};

// Sign-change angles of Lambda found by bisection on a 4096-point grid.
std::vector<double> fermi_angles(const CouplingSet& c, double tol_zero = 1e-9);
CriticalityReport classify(const CouplingSet& c, const Tolerances& tol = {});

// Closed-form Fermi points of the XY+DM chain in region A (angles in (-pi, 0] for s > 0).
std::pair<double, double> fermi_points_xydm(double gamma, double s, double h);

// Polynomial roots (companion matrix + Newton polish); coefficients low to high.
std::vector<cd> poly_roots(const std::vector<double>& p);
std::vector<cd> poly_roots(const std::vector<cd>& p);
cd poly_eval(const std::vector<cd>& p, cd z);

}  // namespace fm
