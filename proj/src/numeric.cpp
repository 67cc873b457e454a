#include "fermobius/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "fermobius/errors.hpp"

namespace fm {

namespace {

GaussRule make_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

cd gl_panel(const std::function<cd(double)>& f, double a, double b, const GaussRule& r) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  cd s = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
  return s * h;
}

struct Adaptive {
  const std::function<cd(double)>& f;
  const QuadOptions& opt;
  const GaussRule& lo = gauss_legendre(16);
  const GaussRule& hi = gauss_legendre(32);
  double scale = 0.0;

  cd run(double a, double b, cd coarse, int depth) {
    cd fine = gl_panel(f, a, b, hi);
    double err = std::abs(fine - coarse);
    double tol = std::max(opt.abs_tol, opt.rel_tol * scale) * (b - a);
    if (err <= tol) return fine;
    if (depth >= opt.max_depth)
      throw Error(ErrorKind::Accuracy, "adaptive quadrature did not converge");
    double m = 0.5 * (a + b);
    cd left = gl_panel(f, a, m, lo), right = gl_panel(f, m, b, lo);
    return run(a, m, left, depth + 1) + run(m, b, right, depth + 1);
  }
};

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

cd integrate(const std::function<cd(double)>& f, double a, double b, const QuadOptions& opt) {
  if (a == b) return 0.0;
  Adaptive ad{f, opt};
  cd first = gl_panel(f, a, b, ad.lo);
  ad.scale = std::abs(gl_panel(f, a, b, ad.hi)) / std::abs(b - a);
  return ad.run(a, b, first, 0);
}

cd lngamma(cd z) {
  // Shift to Re z >= 15, Stirling series, then undo the shift with principal logs.
  cd shift = 0.0;
  while (z.real() < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  static const double b[] = {1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188,
                             -691.0 / 360360, 1.0 / 156, -3617.0 / 122400};
  cd zi = 1.0 / z, z2 = zi * zi, term = zi, series = 0.0;
  for (double c : b) {
    series += c * term;
    term *= z2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series - shift;
}

cd log2cosh(cd u) {
  if (u.real() < 0) u = -u;
  return u + std::log(1.0 + std::exp(-2.0 * u));
}

}  // namespace fm

namespace fm {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fm
