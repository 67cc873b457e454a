#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fermobius/chain_model.hpp"
#include "fermobius/mobius.hpp"

namespace fm {

double I_alpha(double alpha);

// Pinching points in anticlockwise order.
double entropy_aef(const std::vector<cd>& u, double X, double alpha);

enum class ClosedFormModel { CritXX, IsingLine, XXDM };

struct ClosedFormParams {
  ClosedFormModel model = ClosedFormModel::CritXX;
  double h = 0.0;      // CritXX, XXDM
  double gamma = 1.0;  // IsingLine
  double s = 0.0;      // XXDM
};

double closed_form(const ClosedFormParams& p, double X, double alpha);

struct AsymptoticEntropy {
  double log_coefficient = 0.0;
  std::optional<double> constant;  // empty when not known in closed form
  std::string formula;
  std::string note;
};

// Leading log|X| coefficient (alpha+1)/(12 alpha) (R + Q/2) P for a critical report.
AsymptoticEntropy asymptotic_form(const CriticalityReport& rep, int P, double alpha);

// sigma_tau = (-1)^tau for tau = 1..2P.
int interval_sign(int tau);
// sum_{tau < tau'} sigma_tau sigma_tau'; equals -P.
int exponent_sum(int P);

// Z(x) = prod_{tau<tau'} Z(x_tau, x_tau')^{-sigma_tau sigma_tau'}, in log form.
double multiinterval_logZ(const std::function<double(double, double)>& single_logZ, const std::vector<double>& x);
// Same combination for entropies: S = sum -sigma sigma' S(x_tau, x_tau').
double multiinterval_S(const std::function<double(double)>& single_S, const std::vector<double>& x);

struct InsertionData {
  std::vector<cd> u, v;
  std::vector<double> x;
  int P = 1;
};

struct Jacobians {
  std::vector<cd> du, dv, dx;
};

enum class TransformKind { Mobius, Conformal, Unified };

struct TransformFactor {
  cd log_factor = 0.0;
  cd factor = 1.0;
};

TransformFactor transform_prediction(TransformKind kind, const InsertionData& data, const Jacobians& jac,
                                     double alpha);

}  // namespace fm
