#include "fermobius/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fermobius/errors.hpp"

namespace fm {

namespace {

struct SymbolParts {
  double tp;    // Theta+(e^{i th})
  cd xi;        // Xi(e^{i th})
};

SymbolParts parts(const CouplingSet& c, double th) {
  double tp = 0.0;
  cd xi = 0.0;
  for (int l = -c.L; l <= c.L; ++l) {
    cd e = std::polar(1.0, l * th);
    tp += (0.5 * (c.a(l) + c.a(-l)) * e).real();
    xi += c.b(l) * e;
  }
  return {tp, xi};
}

Eigen::Matrix2cd m_matrix(const CouplingSet& c, double th) {
  SymbolParts p = parts(c, th);
  double r = std::sqrt(p.tp * p.tp + std::norm(p.xi));
  Eigen::Matrix2cd M;
  if (r == 0.0) throw Error(ErrorKind::OnDiscontinuity, "symbol evaluated at a pinching");
  M << p.tp / r, p.xi / r, std::conj(p.xi) / r, -p.tp / r;
  return M;
}

enum class Case { Plus, M, Minus };

Case symbol_case(double lp, double lm) {
  if (lp < 0 && lm > 0) return Case::Plus;
  if (lp > 0 && lm < 0) return Case::Minus;
  if (lp >= 0 && lm >= 0) return Case::M;
  throw Error(ErrorKind::NumericalConsistency, "Lambda(theta) and Lambda(-theta) both negative");
}

Eigen::Matrix2cd eval_case(const CouplingSet& c, double th, Case k) {
  switch (k) {
    case Case::Plus: return Eigen::Matrix2cd::Identity();
    case Case::Minus: return -Eigen::Matrix2cd::Identity();
    case Case::M: return m_matrix(c, th);
  }
  return {};
}

// G(-th) = -sx conj(G(th)) sx, applied to a Fourier block
Eigen::Matrix2cd reflect(const Eigen::Matrix2cd& H) {
  Eigen::Matrix2cd R;
  R << -std::conj(H(1, 1)), -std::conj(H(1, 0)), -std::conj(H(0, 1)), -std::conj(H(0, 0));
  return R;
}

double refine_pinching(const CouplingSet& c, double th0) {
  auto rad = [&](double t) {
    SymbolParts p = parts(c, t);
    return std::sqrt(p.tp * p.tp + std::norm(p.xi));
  };
  double a = th0 - 1e-5, b = th0 + 1e-5;
  for (int it = 0; it < 120 && b - a > 1e-16; ++it) {
    double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (rad(m1) < rad(m2)) b = m2;
    else a = m1;
  }
  return 0.5 * (a + b);
}

// symbol discontinuities folded into [0, pi]
std::vector<double> breakpoints(const CouplingSet& c) {
  std::vector<double> bp{0.0, kPi};
  for (double t : fermi_angles(c)) bp.push_back(std::abs(t));
  SpectralCurve sc = spectral_curve(c);
  for (int i : sc.on_circle) bp.push_back(std::abs(refine_pinching(c, std::arg(sc.roots[i].z))));
  std::sort(bp.begin(), bp.end());
  std::vector<double> out;
  for (double t : bp) {
    t = std::clamp(t, 0.0, kPi);
    if (out.empty() || t - out.back() > 1e-13) out.push_back(t);
  }
  if (out.back() < kPi) out.push_back(kPi);
  return out;
}

using Blocks = std::vector<Eigen::Matrix2cd>;

// sum_i w_i G(th_i) e^{i th_i d}, d = -D..D, on one panel
void panel_moments(const CouplingSet& c, double a, double b, Case k, long D, Blocks& acc) {
  const GaussRule& r = gauss_legendre(40);
  double mid = 0.5 * (a + b), h = 0.5 * (b - a);
  for (size_t i = 0; i < r.x.size(); ++i) {
    double th = mid + h * r.x[i];
    Eigen::Matrix2cd g = eval_case(c, th, k) * (r.w[i] * h);
    cd step = std::polar(1.0, th), e = std::polar(1.0, -double(D) * th);
    for (long d = -D; d <= D; ++d) {
      acc[d + D] += g * e;
      e *= step;
    }
  }
}

double block_diff(const Blocks& x, const Blocks& y) {
  double m = 0.0;
  for (size_t i = 0; i < x.size(); ++i) m = std::max(m, (x[i] - y[i]).cwiseAbs().maxCoeff());
  return m;
}

void adaptive_panel(const CouplingSet& c, double a, double b, Case k, long D, double tol, Blocks& acc,
                    int depth) {
  Blocks whole(2 * D + 1, Eigen::Matrix2cd::Zero()), halves(2 * D + 1, Eigen::Matrix2cd::Zero());
  double m = 0.5 * (a + b);
  panel_moments(c, a, b, k, D, whole);
  panel_moments(c, a, m, k, D, halves);
  panel_moments(c, m, b, k, D, halves);
  double err = block_diff(whole, halves) / (2 * kPi);
  if (err <= tol * (b - a) / kPi || k != Case::M) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += halves[i];
    return;
  }
  if (depth > 40) {
    std::ostringstream os;
    os << "symbol Fourier coefficients did not converge on [" << a << ", " << b << "]";
    throw Error(ErrorKind::Accuracy, os.str());
  }
  adaptive_panel(c, a, m, k, D, tol, acc, depth + 1);
  adaptive_panel(c, m, b, k, D, tol, acc, depth + 1);
}

}  // namespace

SymbolSample symbol(const CouplingSet& c, double theta, double tol_zero) {
  double lp = dispersion(c, theta), lm = dispersion(c, -theta);
  if (std::abs(lp) < tol_zero || std::abs(lm) < tol_zero) {
    std::ostringstream os;
    os << "symbol requested at a discontinuity, theta = " << theta;
    throw Error(ErrorKind::OnDiscontinuity, os.str());
  }
  return {theta, eval_case(c, theta, symbol_case(lp, lm))};
}

long SubsystemSpec::size() const {
  long n = 0;
  for (auto& iv : intervals) n += iv.second - iv.first + 1;
  return n;
}

std::vector<long> SubsystemSpec::sites() const {
  std::vector<long> s;
  for (auto& iv : intervals)
    for (long x = iv.first; x <= iv.second; ++x) s.push_back(x);
  return s;
}

SubsystemSpec make_subsystem(std::vector<std::pair<long, long>> intervals) {
  if (intervals.empty()) throw Error(ErrorKind::Domain, "subsystem needs at least one interval");
  for (size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].second < intervals[i].first)
      throw Error(ErrorKind::Domain, "interval end precedes its start");
    if (i > 0 && intervals[i].first <= intervals[i - 1].second)
      throw Error(ErrorKind::Domain, "intervals must be disjoint and ascending");
  }
  return {std::move(intervals)};
}

SubsystemSpec single_interval(long n) { return make_subsystem({{1, n}}); }

std::vector<Eigen::Matrix2cd> symbol_coefficients(const CouplingSet& c, long D, const Mode& mode) {
  validate(c);
  Blocks out(2 * D + 1, Eigen::Matrix2cd::Zero());
  if (mode.kind == Mode::Finite) {
    int N = mode.N;
    if (N <= 2 * D) throw Error(ErrorKind::Domain, "finite chain too short for the subsystem (N <= 2 max|n-m|)");
    for (int k = 0; k < N; ++k) {
      double th = 2.0 * kPi * k / N;
      Eigen::Matrix2cd g = symbol(c, th).G / double(N);
      cd step = std::polar(1.0, th), e = std::polar(1.0, -double(D) * th);
      for (long d = -D; d <= D; ++d) {
        out[d + D] += g * e;
        e *= step;
      }
    }
    return out;
  }
  std::vector<double> bp = breakpoints(c);
  double width = std::min(kPi / 8, 20.0 / std::max<long>(D, 1));
  Blocks half(2 * D + 1, Eigen::Matrix2cd::Zero());
  for (size_t j = 0; j + 1 < bp.size(); ++j) {
    double a = bp[j], b = bp[j + 1];
    double mid = 0.5 * (a + b);
    Case k = symbol_case(dispersion(c, mid), dispersion(c, -mid));
    int n = std::max(1, int(std::ceil((b - a) / width)));
    for (int i = 0; i < n; ++i)
      adaptive_panel(c, a + (b - a) * i / n, a + (b - a) * (i + 1) / n, k, D, mode.tol, half, 0);
  }
  for (auto& h : half) h /= 2 * kPi;
  for (long d = -D; d <= D; ++d) out[d + D] = half[d + D] + reflect(half[d + D]);
  return out;
}

CorrelationMatrix build_VX(const CouplingSet& c, const SubsystemSpec& sub, const Mode& mode) {
  CorrelationMatrix cm;
  cm.mode = mode;
  cm.sites = sub.sites();
  long n = long(cm.sites.size());
  long D = cm.sites.back() - cm.sites.front();
  Blocks g = symbol_coefficients(c, D, mode);
  cm.V.resize(2 * n, 2 * n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) cm.V.block<2, 2>(2 * i, 2 * j) = g[cm.sites[i] - cm.sites[j] + D];
  // V_{nm} = (1/2pi) int G e^{i th (n-m)}; Hermitian by construction up to rounding
  Eigen::MatrixXcd V = 0.5 * (cm.V + cm.V.adjoint());
  double asym = (cm.V - V).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw Error(ErrorKind::NumericalConsistency, "correlation matrix is not Hermitian");
  cm.V = std::move(V);
  return cm;
}

std::vector<double> entanglement_spectrum(const CorrelationMatrix& V) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(V.V, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalConsistency, "eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  long m = ev.size(), n = m / 2;
  std::vector<double> nu(n);
  for (long i = 0; i < n; ++i) {
    double lo = ev(i), hi = ev(m - 1 - i);
    if (std::abs(lo + hi) > 1e-8) {
      std::ostringstream os;
      os << "eigenvalues are not +- paired (residual " << std::abs(lo + hi) << ")";
      throw Error(ErrorKind::Pairing, os.str());
    }
    double x = 0.5 * (hi - lo);
    if (x > 1.0 + 1e-8) throw Error(ErrorKind::NumericalConsistency, "eigenvalue beyond 1 + 1e-8");
    nu[i] = std::clamp(x, 0.0, 1.0);
  }
  std::sort(nu.begin(), nu.end(), std::greater<>());
  return nu;
}

EntropyResult renyi(const std::vector<double>& nu, double alpha) {
  if (!(alpha > 0)) throw Error(ErrorKind::Domain, "Renyi index alpha must be positive");
  EntropyResult r;
  r.alpha = alpha;
  r.size = long(nu.size());
  r.nu = nu;
  double S = 0.0;
  for (double v : nu) {
    if (v > 1 + 1e-8 || v < -1e-8) throw Error(ErrorKind::NumericalConsistency, "spectral value outside [0, 1]: " + std::to_string(v));
    v = std::clamp(v, 0.0, 1.0);
    double p = 0.5 * (1 + v), q = 0.5 * (1 - v);
    if (alpha == 1.0) {
      if (p > 0) S -= p * std::log(p);
      if (q > 0) S -= q * std::log(q);
    } else {
      S += std::log(std::pow(p, alpha) + std::pow(q, alpha)) / (1 - alpha);
    }
  }
  r.S = std::max(S, 0.0);
  r.Z = std::exp((1 - alpha) * r.S);
  return r;
}

EntropyResult entropy(const CouplingSet& c, const SubsystemSpec& sub, double alpha, const Mode& mode) {
  return renyi(entanglement_spectrum(build_VX(c, sub, mode)), alpha);
}

std::vector<FlowRow> entropy_flow_scan(const CouplingSet& c, const std::vector<double>& zetas, double alpha,
                                       const SubsystemSpec& sub, const Mode& mode, int jobs) {
  CriticalityReport rep0 = classify(c);
  double S0 = entropy(c, sub, alpha, mode).S;
  std::vector<FlowRow> rows(zetas.size());
  parallel_for(int(zetas.size()), jobs, [&](int i) {
    FlowRow& r = rows[i];
    r.zeta = zetas[i];
    MobiusMap m = boost(r.zeta);
    r.couplings = r.zeta == 0.0 ? c : transform_couplings(m, c);
    r.report = classify(r.couplings);
    r.S = r.zeta == 0.0 ? S0 : entropy(r.couplings, sub, alpha, mode).S;
    r.dS_numeric = r.S - S0;
    r.dS_predicted = predicted_shift(alpha, m, rep0, int(sub.intervals.size())).delta_S;
  });
  return rows;
}

}  // namespace fm
