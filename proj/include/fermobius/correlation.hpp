#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fermobius/chain_model.hpp"
#include "fermobius/mobius.hpp"

namespace fm {

struct SymbolSample {
  double theta = 0.0;
  Eigen::Matrix2cd G;
};

// I, M(theta) or -I according to the signs of Lambda(theta), Lambda(-theta).
SymbolSample symbol(const CouplingSet& c, double theta, double tol_zero = 1e-9);

// Inclusive integer intervals, ascending and disjoint.
struct SubsystemSpec {
  std::vector<std::pair<long, long>> intervals;

  long size() const;
  std::vector<long> sites() const;
};

SubsystemSpec make_subsystem(std::vector<std::pair<long, long>> intervals);
SubsystemSpec single_interval(long n);  // sites 1..n

struct Mode {
  enum Kind { Finite, Thermodynamic } kind = Thermodynamic;
  int N = 0;          // finite chain length
  double tol = 1e-10; // per Fourier coefficient, thermodynamic mode

  static Mode finite(int n) { return {Finite, n, 1e-10}; }
  static Mode thermo(double tol = 1e-10) { return {Thermodynamic, 0, tol}; }
};

// 2x2 Fourier blocks G_d for d = -D..D, stored at index d + D.
std::vector<Eigen::Matrix2cd> symbol_coefficients(const CouplingSet& c, long D, const Mode& mode);

struct CorrelationMatrix {
  Eigen::MatrixXcd V;  // 2|X| x 2|X|
  Mode mode;
  std::vector<long> sites;
};

CorrelationMatrix build_VX(const CouplingSet& c, const SubsystemSpec& sub, const Mode& mode);

// Half-spectrum nu_l in [0, 1], descending.
std::vector<double> entanglement_spectrum(const CorrelationMatrix& V);

struct EntropyResult {
  double alpha = 1.0;
  long size = 0;
  std::vector<double> nu;
  double Z = 1.0;
  double S = 0.0;
};

EntropyResult renyi(const std::vector<double>& nu, double alpha);
EntropyResult entropy(const CouplingSet& c, const SubsystemSpec& sub, double alpha, const Mode& mode);

struct FlowRow {
  double zeta = 0.0;
  CouplingSet couplings;
  CriticalityReport report;
  double S = 0.0;
  double dS_numeric = 0.0;
  double dS_predicted = 0.0;
};

// Boosts the chain along a zeta grid and compares S(zeta) - S(0) with the Jacobian prediction.
std::vector<FlowRow> entropy_flow_scan(const CouplingSet& c, const std::vector<double>& zetas, double alpha,
                                       const SubsystemSpec& sub, const Mode& mode, int jobs = 1);

}  // namespace fm
