#pragma once

#include <string>
#include <vector>

#include "fermobius/chain_model.hpp"

namespace fm {

struct MobiusMap {
  cd a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  cd det() const { return a * d - b * c; }
  bool is_so11(double tol = 1e-12) const;
  bool preserves_circle(double tol = 1e-12) const;  // SU(1,1) up to sign
  MobiusMap inverse() const { return {d, -b, -c, a}; }
};

MobiusMap operator*(const MobiusMap& m1, const MobiusMap& m2);  // m1 after m2

// Checks ad - bc = 1 within 1e-12.
MobiusMap make_mobius(cd a, cd b, cd c, cd d);
MobiusMap boost(double zeta);
MobiusMap rotation(double phi);

struct PointImage {
  cd z;
  cd jac;  // dz'/dz = (cz+d)^-2
};

PointImage map_point(const MobiusMap& m, cd z);

// d theta'/d theta for |u| = 1 on circle-preserving maps; real and positive.
double angular_jacobian(const MobiusMap& m, cd u);

struct AdmissibilityReport {
  bool admissible = false;
  bool side_preserved = false;
  bool quartet_preserved = false;
  bool indeterminate = false;
  std::vector<cd> moved_roots;
  std::string reason;
};

AdmissibilityReport is_admissible(const MobiusMap& m, const SpectralCurve& curve,
                                  const Tolerances& tol = {});

// Spin-L action on the coefficient vectors of z^L Theta and z^L Xi.
CouplingSet transform_couplings(const MobiusMap& m, const CouplingSet& c,
                                const Tolerances& tol = {});

struct XYDM {
  double gamma = 0.0, s = 0.0, h = 0.0;
};

XYDM transform_xydm(double zeta, double gamma, double s, double h);

struct ShiftPrediction {
  double delta_S = 0.0;
  cd z_factor = 1.0;
  bool real = true;
};

double delta_alpha(double alpha);

// Jacobian factor prod (du')^{2P Delta} prod (dv')^{P Delta} and the entropy shift.
ShiftPrediction predicted_shift(double alpha, const MobiusMap& m, const std::vector<cd>& u,
                                const std::vector<cd>& v, int P);
ShiftPrediction predicted_shift(double alpha, const MobiusMap& m, const CriticalityReport& rep, int P);

}  // namespace fm
