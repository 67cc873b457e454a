#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fermobius/chain_model.hpp"

namespace fm {

// Cut between two branch points; outside cuts are straight in the y = 1/z chart.
struct Cut {
  cd a, b;
  bool y_chart = false;
};

struct HyperellipticCurve {
  int L = 0, g = 0;
  std::vector<cd> z;     // z_1..z_{4L}; first 2L inside, z_{4L+1-j} = 1/z_j
  std::vector<int> eps;  // +1 zero, -1 pole of g^2 = (Theta+Xi)/(Theta-Xi)
  std::vector<Cut> cuts; // cut r joins z_{2r+1}, z_{2r+2}
  CouplingSet couplings; // after the internal pre-boost, if any
  double pre_boost = 0.0;

  cd w(cd z) const;      // branch of sqrt(P) up to a constant, cut along the cuts
};

struct CurveOptions {
  std::optional<cd> pinch_hint;   // root nearest this point goes to z_{2L}
  std::vector<cd> inside_order;   // try this ordering of the inside roots first
  double pre_boost = 0.3;         // used when P has roots at 0 and infinity
  Tolerances tol;
};

// Gapped chains with real couplings only. Searches root orderings until the period
// matrix is symmetric with positive imaginary part.
HyperellipticCurve build_curve(const CouplingSet& c, const CurveOptions& opt = {});

// Geometric problems of a given ordering (empty when usable).
std::vector<std::string> curve_problems(const HyperellipticCurve& curve);

struct PeriodMatrix {
  Eigen::MatrixXcd Pi;
  double asymmetry = 0.0;
  double min_imag_eig = 0.0;
};

PeriodMatrix period_matrix(const HyperellipticCurve& curve);

struct ThetaCharacteristics {
  Eigen::VectorXd mu, nu, e;
};

ThetaCharacteristics characteristics(const HyperellipticCurve& curve);

struct LogTheta {
  cd log_value;           // log theta, continuous magnitude, principal phase
  Eigen::VectorXcd grad;  // grad_s log theta
};

LogTheta log_theta(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
                   const Eigen::MatrixXcd& Pi, double tol = 1e-12, bool with_grad = false);
cd theta(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
         const Eigen::MatrixXcd& Pi, double tol = 1e-12);
// theta(s) / theta(0); ThetaNull when |theta(0)| < 1e-12.
cd theta_normalized(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
                    const Eigen::MatrixXcd& Pi, double tol = 1e-12);

struct CurveData {
  HyperellipticCurve curve;
  PeriodMatrix period;
  ThetaCharacteristics ch;
};

CurveData curve_data(const CouplingSet& c, const CurveOptions& opt = {});

cd beta_of(cd lambda);
// |X| log(lambda^2 - 1) + log(theta^(beta e) theta^(-beta e)).
cd dx_lambda(const CurveData& d, cd lambda, double X);

struct ContourSpec {
  double eta = 0.0;  // half-height of the strip (0: automatic)
  double W = 0.0;    // half-width (0: automatic)
  int nodes = 20;
};

// Renyi entropy from the theta asymptotics, integrating around the real omega axis.
double entropy_contour(const CurveData& d, double alpha, const ContourSpec& spec = {});

struct ModularSwap {
  Eigen::MatrixXcd Pi;       // Pi' for the swapped basis
  Eigen::VectorXd e, mu, nu; // real parts of e' (complex in general, see e_c)
  Eigen::VectorXcd e_c;
  int s = 0, s_prime = 0;
  bool complex_pinch = false;
  double residual = 0.0;     // identity check at the reference points
  cd rhs_factor(cd beta) const;
};

// Change of homology basis for a pair degenerating at the unit circle; the curve must
// have been built with pinch_hint so that z_{2L} is the approaching root.
ModularSwap modular_swap(const CurveData& d);
// Both sides of the basis-change identity at beta.
std::pair<cd, cd> modular_identity(const CurveData& d, const ModularSwap& m, cd beta);

struct PinchReport {
  std::vector<double> log_distance;
  std::vector<double> S;
  double slope = 0.0;
  double c = 0.0;  // -slope / ((alpha+1)/(6 alpha))
};

// Unit-circle pinching: S_alpha against log|z_{2L} - z_{2L+2}| along the family.
PinchReport pinch_limits_unit(const std::vector<CouplingSet>& family, double alpha);
// Outside degeneration: entropies along the family (converging to the reduced theory).
std::vector<double> pinch_limits_outside(const std::vector<CouplingSet>& family, double alpha);

// Two-term limit of theta[mu;nu](s) exp(-pi i Pi_rr / 4) for a same-character pair on cut r (1-based index r).
cd same_character_limit(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
                        const Eigen::MatrixXcd& Pi, int r);

// Genus-1 oracle: i K(k')/K(k) from four real branch points.
cd genus1_tau(std::vector<double> roots);
double ellipk_agm(double k);

}  // namespace fm
