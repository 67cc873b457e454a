#include "fermobius/asymptotics.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "fermobius/errors.hpp"

namespace fm {

namespace {

// lambda = tanh t turns omega(lambda) into -t/pi and dlogF/dlambda dlambda into
// alpha (tanh(alpha t) - tanh t) dt; the integrand is even in t.
double i_alpha_uncached(double alpha) {
  auto weight = [alpha](double t) {
    if (alpha == 1.0) {
      double sc = 1.0 / std::cosh(t);
      return -t * sc * sc;
    }
    return alpha * (std::tanh(alpha * t) - std::tanh(t)) / (1.0 - alpha);
  };
  auto f = [&](double t) -> cd { return weight(t) * lngamma(cd(0.5, -t / kPi)).imag(); };
  double T = 24.0 / std::min(alpha, 1.0) + 10.0;
  QuadOptions opt;
  double sum = 0.0;
  for (double a = 0.0; a < T; a += 1.0) sum += integrate(f, a, a + 1.0, opt).real();
  return -2.0 * sum / kPi;
}

double log_term(double alpha) { return (alpha + 1.0) / (12.0 * alpha); }

}  // namespace

double I_alpha(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw Error(ErrorKind::Domain, "I_alpha needs alpha > 0");
  static std::mutex mu;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
  }
  double v = i_alpha_uncached(alpha);
  std::lock_guard<std::mutex> lock(mu);
  cache[alpha] = v;
  return v;
}

double entropy_aef(const std::vector<cd>& u, double X, double alpha) {
  int R = int(u.size());
  if (R % 2 != 0) throw Error(ErrorKind::Domain, "pinching count must be even");
  for (int i = 0; i < R; ++i) {
    if (std::abs(std::abs(u[i]) - 1.0) > 1e-10) throw Error(ErrorKind::Domain, "pinchings must have unit modulus");
    for (int j = 0; j < i; ++j)
      if (std::abs(u[i] - u[j]) < 1e-12) throw Error(ErrorKind::Degeneracy, "coincident pinching points");
  }
  cd pair_sum = 0.0;
  for (int k = 0; k < R; ++k)
    for (int j = 0; j < R; ++j)
      if (k != j) pair_sum += ((k + j) % 2 == 0 ? 1.0 : -1.0) * std::log(u[k] - u[j]);
  if (std::abs(pair_sum.imag()) > 1e-10)
    throw Error(ErrorKind::NumericalConsistency, "pair sum of logarithms is not real");
  return log_term(alpha) * (R * std::log(X) - pair_sum.real()) + R * I_alpha(alpha);
}

double closed_form(const ClosedFormParams& p, double X, double alpha) {
  double k = log_term(alpha);
  switch (p.model) {
    case ClosedFormModel::CritXX: {
      if (!(std::abs(p.h) < 2)) throw Error(ErrorKind::Domain, "critical XX needs |h| < 2");
      double gap = 2.0 * std::sqrt(1.0 - 0.25 * p.h * p.h);  // |u1 - u2|
      return 2 * k * std::log(X) + 2 * k * std::log(gap) + 2 * I_alpha(alpha);
    }
    case ClosedFormModel::IsingLine:
      if (!(p.gamma > 0)) throw Error(ErrorKind::Domain, "Ising line needs gamma > 0");
      return k * std::log(4 * p.gamma * X) + I_alpha(alpha);
    case ClosedFormModel::XXDM: {
      double q = p.s * p.s - 0.25 * p.h * p.h + 1.0;
      if (!(q > 0)) throw Error(ErrorKind::Domain, "XX+DM needs s^2 - (h/2)^2 + 1 > 0");
      return 2 * k * std::log(X) + k * std::log(4 * q / (p.s * p.s + 1)) + 2 * I_alpha(alpha);
    }
  }
  return 0.0;
}

AsymptoticEntropy asymptotic_form(const CriticalityReport& rep, int P, double alpha) {
  AsymptoticEntropy a;
  a.log_coefficient = log_term(alpha) * (rep.R + 0.5 * rep.Q) * P;
  if (rep.Q == 0 && P == 1 && rep.R > 0) {
    a.formula = "pinchings";
    a.note = "constant from entropy_aef with the pinching points";
  } else if (rep.R == 0 && rep.Q == 0) {
    a.formula = "gapped";
    a.note = "entropy saturates; no log term";
  } else {
    a.formula = "conformal";
    a.note = "constant term not known in closed form";
  }
  return a;
}

int interval_sign(int tau) { return tau % 2 == 0 ? 1 : -1; }

int exponent_sum(int P) {
  int s = 0;
  for (int t = 1; t <= 2 * P; ++t)
    for (int u = t + 1; u <= 2 * P; ++u) s += interval_sign(t) * interval_sign(u);
  return s;
}

namespace {

void check_endpoints(const std::vector<double>& x) {
  if (x.empty() || x.size() % 2 != 0) throw Error(ErrorKind::Shape, "need 2P interval endpoints");
  for (size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw Error(ErrorKind::Domain, "endpoints must be strictly increasing");
  int P = int(x.size() / 2);
  if (exponent_sum(P) != -P) throw Error(ErrorKind::NumericalConsistency, "exponent identity failed");
}

}  // namespace

double multiinterval_logZ(const std::function<double(double, double)>& single_logZ, const std::vector<double>& x) {
  check_endpoints(x);
  double s = 0.0;
  int n = int(x.size());
  for (int t = 1; t <= n; ++t)
    for (int u = t + 1; u <= n; ++u) s += -interval_sign(t) * interval_sign(u) * single_logZ(x[t - 1], x[u - 1]);
  return s;
}

double multiinterval_S(const std::function<double(double)>& single_S, const std::vector<double>& x) {
  return multiinterval_logZ([&](double a, double b) { return single_S(std::abs(b - a)); }, x);
}

TransformFactor transform_prediction(TransformKind kind, const InsertionData& data, const Jacobians& jac,
                                     double alpha) {
  double da = delta_alpha(alpha);
  int P = data.P;
  bool need_x = kind != TransformKind::Mobius, need_uv = kind != TransformKind::Conformal;
  if (need_uv && (jac.du.size() != data.u.size() || jac.dv.size() != data.v.size()))
    throw Error(ErrorKind::Shape, "one Jacobian per insertion point required");
  if (need_x && jac.dx.size() != size_t(2 * P))
    throw Error(ErrorKind::Shape, "one Jacobian per interval endpoint required");
  cd lf = 0.0;
  switch (kind) {
    case TransformKind::Mobius:
      for (cd j : jac.du) lf += 2.0 * P * da * std::log(j);
      for (cd j : jac.dv) lf += double(P) * da * std::log(j);
      break;
    case TransformKind::Conformal: {
      double C = 0.5 * double(data.u.size()) + 0.25 * double(data.v.size());
      for (cd j : jac.dx) lf += 2.0 * C * da * std::log(j);
      break;
    }
    case TransformKind::Unified:
      for (cd x : jac.dx) {
        for (cd j : jac.du) lf += da * (std::log(j) + std::log(x));
        for (cd j : jac.dv) lf += 0.5 * da * (std::log(j) + std::log(x));
      }
      break;
  }
  return {lf, std::exp(lf)};
}

}  // namespace fm
