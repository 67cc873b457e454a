#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace fm {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

// Cached Gauss-Legendre rule with n nodes.
const GaussRule& gauss_legendre(int n);

struct QuadOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_depth = 40;
};

// Adaptive Gauss-Legendre (16 vs 32 nodes) of a complex integrand on [a, b].
// Throws Accuracy when the subdivision budget runs out.
cd integrate(const std::function<cd(double)>& f, double a, double b,
             const QuadOptions& opt = {});

// Complex log-gamma on the principal branch (continuous off the negative axis).
cd lngamma(cd z);

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

// log(2 cosh u) without overflow, principal branch for |Im u| < pi/2.
cd log2cosh(cd u);

}  // namespace fm
