#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "fermobius/errors.hpp"
#include "fermobius/riemann.hpp"

namespace fm {

namespace {

// Upper incomplete gamma for s in (1/2)Z, s > 0.
double upper_gamma_half(double s, double x) {
  double v, t;
  if (std::abs(s - std::round(s)) < 1e-12) {
    v = std::exp(-x);
    t = 1.0;
  } else {
    v = std::sqrt(kPi) * std::erfc(std::sqrt(x));
    t = 0.5;
  }
  for (; t + 0.5 < s; t += 1.0) v = t * v + std::pow(x, t) * std::exp(-x);
  return v;
}

// Lattice sum over n in Z^g with a fixed offset set around the rounded centre.
class ThetaSum {
 public:
  ThetaSum(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::MatrixXcd& Pi, double tol)
      : mu_(mu), nu_(nu), Pi_(Pi), g_(int(mu.size())) {
    if (Pi.rows() != g_ || Pi.cols() != g_ || nu.size() != g_) throw Error(ErrorKind::Shape, "theta dimension mismatch");
    if (g_ == 0) return;
    Eigen::MatrixXd Y = 0.5 * (Pi.imag() + Pi.imag().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y);
    double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0)) throw Error(ErrorKind::Domain, "Im Pi is not positive definite");
    Yinv_ = Y.inverse();
    double rho = std::sqrt(kPi * lmin);
    double R = 0.5 * (std::sqrt(2.0 * g_) + rho);
    auto bound = [&](double r) {
      double x = std::pow(std::max(r - 0.5 * rho, 0.0), 2);
      return 0.5 * g_ * std::pow(2.0 / rho, g_) * upper_gamma_half(0.5 * g_, x);
    };
    while (bound(R) > tol) {
      R += 0.25;
      if (R > 200) throw Error(ErrorKind::Accuracy, "theta truncation radius out of range");
    }
    // offsets valid for any fractional centre in [-1/2, 1/2]^g
    double pad = std::sqrt(kPi * lmax) * 0.5 * std::sqrt(double(g_));
    double Rk = R + pad;
    std::vector<int> hw(g_);
    for (int i = 0; i < g_; ++i) hw[i] = int(std::ceil(Rk / std::sqrt(kPi) * std::sqrt(Yinv_(i, i))));
    std::vector<int> k(g_);
    std::function<void(int)> rec = [&](int i) {
      if (i == g_) {
        Eigen::VectorXd v(g_);
        for (int j = 0; j < g_; ++j) v(j) = k[j];
        if (kPi * v.dot(Y * v) <= Rk * Rk) offsets_.push_back(v);
        return;
      }
      for (k[i] = -hw[i]; k[i] <= hw[i]; ++k[i]) rec(i + 1);
    };
    rec(0);
  }

  LogTheta eval(const Eigen::VectorXcd& s, bool grad) const {
    LogTheta out;
    if (g_ == 0) {
      out.log_value = 0.0;
      return out;
    }
    Eigen::VectorXd c = -Yinv_ * s.imag() - mu_;
    Eigen::VectorXd base = c.array().round();
    Eigen::VectorXcd sn = s + nu_.cast<cd>();
    std::vector<cd> ex(offsets_.size());
    double M = -1e300;
    for (size_t i = 0; i < offsets_.size(); ++i) {
      Eigen::VectorXcd m = (base + offsets_[i] + mu_).cast<cd>();
      ex[i] = cd(0, kPi) * m.dot(Pi_ * m) + cd(0, 2 * kPi) * m.dot(sn);
      M = std::max(M, ex[i].real());
    }
    cd sum = 0.0;
    Eigen::VectorXcd gsum = Eigen::VectorXcd::Zero(g_);
    for (size_t i = 0; i < offsets_.size(); ++i) {
      cd t = std::exp(ex[i] - M);
      sum += t;
      if (grad) gsum += t * cd(0, 2 * kPi) * (base + offsets_[i] + mu_).cast<cd>();
    }
    if (sum == cd(0.0)) throw Error(ErrorKind::ThetaNull, "theta lattice sum vanished");
    out.log_value = M + std::log(sum);
    if (grad) out.grad = gsum / sum;
    return out;
  }

 private:
  Eigen::VectorXd mu_, nu_;
  Eigen::MatrixXcd Pi_;
  int g_;
  Eigen::MatrixXd Yinv_;
  std::vector<Eigen::VectorXd> offsets_;
};

cd log_theta_hat(const ThetaSum& ts, const Eigen::VectorXcd& s, cd log0) { return ts.eval(s, false).log_value - log0; }

cd f_alpha(cd w, double alpha) {
  cd u = kPi * w;
  if (alpha == 1.0) return -u * std::tanh(u) + log2cosh(u);
  return (log2cosh(alpha * u) - alpha * log2cosh(u)) / (1.0 - alpha);
}

Eigen::MatrixXcd drop(const Eigen::MatrixXcd& A, int r) {
  int g = int(A.rows());
  Eigen::MatrixXcd B(g - 1, g - 1);
  for (int i = 0, ii = 0; i < g; ++i) {
    if (i == r) continue;
    for (int j = 0, jj = 0; j < g; ++j) {
      if (j == r) continue;
      B(ii, jj++) = A(i, j);
    }
    ++ii;
  }
  return B;
}

template <class V>
V drop(const V& v, int r) {
  V out(v.size() - 1);
  for (int i = 0, k = 0; i < v.size(); ++i)
    if (i != r) out(k++) = v(i);
  return out;
}

}  // namespace

LogTheta log_theta(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
                   const Eigen::MatrixXcd& Pi, double tol, bool with_grad) {
  return ThetaSum(mu, nu, Pi, tol).eval(s, with_grad);
}

cd theta(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
         const Eigen::MatrixXcd& Pi, double tol) {
  return std::exp(log_theta(mu, nu, s, Pi, tol).log_value);
}

cd theta_normalized(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
                    const Eigen::MatrixXcd& Pi, double tol) {
  ThetaSum ts(mu, nu, Pi, tol);
  cd l0 = ts.eval(Eigen::VectorXcd::Zero(mu.size()), false).log_value;
  if (l0.real() < std::log(1e-12)) throw Error(ErrorKind::ThetaNull, "theta vanishes at s = 0; cannot normalize");
  return std::exp(ts.eval(s, false).log_value - l0);
}

cd beta_of(cd lambda) { return std::log((lambda + 1.0) / (lambda - 1.0)) / cd(0, 2 * kPi); }

cd dx_lambda(const CurveData& d, cd lambda, double X) {
  if (std::abs(lambda.imag()) < 1e-14 && std::abs(lambda.real()) <= 1.0)
    throw Error(ErrorKind::Domain, "lambda must lie off [-1, 1]");
  ThetaSum ts(d.ch.mu, d.ch.nu, d.period.Pi, 1e-14);
  int g = d.curve.g;
  cd l0 = ts.eval(Eigen::VectorXcd::Zero(g), false).log_value;
  if (l0.real() < std::log(1e-12)) throw Error(ErrorKind::ThetaNull, "theta vanishes at s = 0");
  Eigen::VectorXcd s = beta_of(lambda) * d.ch.e.cast<cd>();
  return X * std::log(lambda * lambda - 1.0) + log_theta_hat(ts, s, l0) + log_theta_hat(ts, -s, l0);
}

double entropy_contour(const CurveData& d, double alpha, const ContourSpec& spec) {
  if (!(alpha > 0)) throw Error(ErrorKind::Domain, "alpha must be positive");
  double eta = spec.eta > 0 ? spec.eta : 0.2 / std::max(alpha, 1.0);
  if (eta >= 0.5 / std::max(alpha, 1.0))
    throw Error(ErrorKind::Contour, "strip reaches the poles of f_alpha at |Im omega| = 1/(2 max(alpha,1))");
  double W = spec.W > 0 ? spec.W : 40.0 / (2 * kPi * std::min(alpha, 1.0)) + 1.0;
  ThetaSum ts(d.ch.mu, d.ch.nu, d.period.Pi, 1e-14);
  Eigen::VectorXcd e = d.ch.e.cast<cd>();
  auto dlogh = [&](cd w) {
    cd b = cd(0, 1) * w - 0.5;
    LogTheta t1 = ts.eval(b * e, true), t2 = ts.eval(-b * e, true);
    return cd(0, 1) * (e.dot(t1.grad) - e.dot(t2.grad));
  };
  const GaussRule& r = gauss_legendre(spec.nodes);
  auto edge = [&](cd p, cd q, int n) {
    cd tot = 0.0;
    for (int k = 0; k < n; ++k) {
      cd a = p + (q - p) * (double(k) / n), b = p + (q - p) * (double(k + 1) / n);
      cd mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (size_t i = 0; i < r.x.size(); ++i) {
        cd w = mid + half * r.x[i];
        tot += r.w[i] * half * f_alpha(w, alpha) * dlogh(w);
      }
    }
    return tot;
  };
  cd c0(-W, -eta), c1(W, -eta), c2(W, eta), c3(-W, eta);
  int n = int(std::ceil(4 * W / eta));
  cd I = edge(c0, c1, n) + edge(c1, c2, 4) + edge(c2, c3, n) + edge(c3, c0, 4);
  cd S = 0.5 * I / cd(0, 2 * kPi);
  if (std::abs(S.imag()) > 1e-6 * std::max(1.0, std::abs(S.real())))
    throw Error(ErrorKind::Contour, "contour entropy has a sizeable imaginary part");
  return S.real();
}

cd ModularSwap::rhs_factor(cd beta) const {
  int L = int(e.size() + 1) / 2;
  cd q = Pi(L - 1, L - 1) - 1.0;
  if (L >= 2) q += Pi(L - 2, L - 2) - 2.0 * Pi(L - 1, L - 2);
  return std::exp(cd(0, kPi) * beta * beta * q);
}

namespace {

struct SwapCandidate {
  ModularSwap m;
  Eigen::VectorXd nu_p;
};

SwapCandidate swap_candidate(const CurveData& d, int s, int sp, bool complex_pinch) {
  int L = d.curve.L, g = d.curve.g;
  const auto& ch = d.ch;
  Eigen::MatrixXcd Pp = d.period.Pi;
  Eigen::VectorXd nu = ch.nu;
  if (!complex_pinch) {
    // the standard ordering swaps z_{2L+1} and z_{2L+2}: b_L -> b_L + s' a_L
    Pp(L - 1, L - 1) += double(sp);
    nu(L - 1) += 0.25 * (d.curve.eps[2 * L + 1] - d.curve.eps[2 * L]);
  }
  Eigen::RowVectorXcd drow = Pp.row(L - 1);
  if (L >= 2) drow -= Pp.row(L - 2);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(g, g);
  if (L >= 2) M.row(L - 2) += double(s) * drow;
  M.row(L - 1) -= double(s) * drow;
  SwapCandidate out;
  out.nu_p = nu;
  ModularSwap& m = out.m;
  m.Pi = Pp * M.inverse();
  m.s = s;
  m.s_prime = sp;
  m.complex_pinch = complex_pinch;
  Eigen::RowVectorXcd diff = m.Pi.row(L - 1);
  if (L >= 2) diff -= m.Pi.row(L - 2);
  m.e_c = ch.e.cast<cd>() - diff.transpose();
  m.e = m.e_c.real();
  m.mu = ch.mu;
  double nuL = nu(L - 1), nuL1 = L >= 2 ? nu(L - 2) : 0.0;
  if (L >= 2) m.mu(L - 2) = ch.mu(L - 2) + nuL - nuL1 + 0.5;
  m.mu(L - 1) = ch.mu(L - 1) - nuL + nuL1 + 0.5;
  m.nu = nu;
  return out;
}

}  // namespace

std::pair<cd, cd> modular_identity(const CurveData& d, const ModularSwap& m, cd beta) {
  cd lhs = theta_normalized(d.ch.mu, d.ch.nu, beta * d.ch.e.cast<cd>(), d.period.Pi, 1e-14);
  cd rhs = m.rhs_factor(beta) * theta_normalized(m.mu, m.nu, beta * m.e_c, m.Pi, 1e-14);
  return {lhs, rhs};
}

ModularSwap modular_swap(const CurveData& d) {
  int L = d.curve.L;
  cd z2L = d.curve.z[2 * L - 1];
  double dist = std::abs(z2L - 1.0 / std::conj(z2L));
  for (int i = 0; i < 2 * L; ++i)
    if (i != 2 * L - 1 && std::abs(d.curve.z[i] - 1.0 / std::conj(d.curve.z[i])) < dist * (1 - 1e-9))
      throw Error(ErrorKind::Ordering, "z_{2L} is not the root closest to the unit circle; build with pinch_hint");
  bool complex_pinch = std::abs(z2L.imag()) > 1e-10;
  if (complex_pinch && (L < 2 || std::abs(d.curve.z[2 * L - 2] - std::conj(z2L)) > 1e-8 * std::max(1.0, std::abs(z2L))))
    throw Error(ErrorKind::Ordering, "complex pinching needs z_{2L-1} = conj(z_{2L})");
  std::vector<cd> betas{beta_of(cd(0, 2)), beta_of(cd(1.5, 0.5)), beta_of(cd(3, 0.0))};
  ModularSwap best;
  best.residual = 1e300;
  for (int s : {1, -1}) {
    for (int sp : complex_pinch ? std::vector<int>{0} : std::vector<int>{1, -1}) {
      SwapCandidate cand = swap_candidate(d, s, sp, complex_pinch);
      double res = 0.0;
      try {
        for (cd b : betas) {
          auto [l, r] = modular_identity(d, cand.m, b);
          res = std::max(res, std::abs(l - r) / std::max(1e-300, std::abs(l)));
        }
      } catch (const Error&) {
        continue;
      }
      if (res < best.residual) {
        best = cand.m;
        best.residual = res;
      }
    }
  }
  if (best.residual > 1e-6) {
    std::ostringstream os;
    os << "no basis change satisfies the theta identity (best residual " << best.residual << ")";
    throw Error(ErrorKind::Ordering, os.str());
  }
  return best;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw Error(ErrorKind::Fit, "degenerate abscissae in slope fit");
  return (n * sxy - sx * sy) / den;
}

}  // namespace

PinchReport pinch_limits_unit(const std::vector<CouplingSet>& family, double alpha) {
  if (family.size() < 3) throw Error(ErrorKind::Fit, "need at least three family members for a slope fit");
  PinchReport rep;
  for (const CouplingSet& c : family) {
    CurveData d = curve_data(c);
    double dist = 1e300;
    for (int i = 0; i < 2 * d.curve.L; ++i) {
      cd z = d.curve.z[i];
      dist = std::min(dist, std::abs(z - 1.0 / std::conj(z)));
    }
    rep.log_distance.push_back(std::log(dist));
    rep.S.push_back(entropy_contour(d, alpha));
  }
  rep.slope = fit_slope(rep.log_distance, rep.S);
  rep.c = -rep.slope / ((alpha + 1) / (6 * alpha));
  return rep;
}

std::vector<double> pinch_limits_outside(const std::vector<CouplingSet>& family, double alpha) {
  if (family.empty()) throw Error(ErrorKind::Fit, "empty family");
  std::vector<double> S;
  for (const CouplingSet& c : family) S.push_back(entropy_contour(curve_data(c), alpha));
  return S;
}

cd same_character_limit(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu, const Eigen::VectorXcd& s,
                        const Eigen::MatrixXcd& Pi, int r) {
  int g = int(mu.size());
  if (r < 1 || r > g) throw Error(ErrorKind::Shape, "cut index out of range");
  int i = r - 1;
  double m = mu(i);
  Eigen::MatrixXcd P0 = drop(Pi, i);
  Eigen::VectorXcd delta = drop(Eigen::VectorXcd(Pi.col(i)), i);
  Eigen::VectorXd mu0 = drop(mu, i), nu0 = drop(nu, i);
  Eigen::VectorXcd s0 = drop(s, i);
  cd ph = std::exp(cd(0, 2 * kPi) * (s(i) + nu(i)) * m);
  if (g == 1) return ph + 1.0 / ph;
  return ph * theta(mu0, nu0, s0 + m * delta, P0, 1e-14) + theta(mu0, nu0, s0 - m * delta, P0, 1e-14) / ph;
}

double ellipk_agm(double k) {
  if (!(k >= 0 && k < 1)) throw Error(ErrorKind::Domain, "elliptic modulus must lie in [0, 1)");
  double a = 1.0, b = std::sqrt(1.0 - k * k);
  for (int i = 0; i < 60 && std::abs(a - b) > 1e-16 * a; ++i) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return kPi / (2 * a);
}

cd genus1_tau(std::vector<double> e) {
  if (e.size() != 4) throw Error(ErrorKind::Shape, "genus-1 oracle needs four branch points");
  std::sort(e.begin(), e.end());
  double k2 = (e[3] - e[2]) * (e[1] - e[0]) / ((e[3] - e[1]) * (e[2] - e[0]));
  double k = std::sqrt(k2), kp = std::sqrt(1 - k2);
  return cd(0, ellipk_agm(kp) / ellipk_agm(k));
}

}  // namespace fm
