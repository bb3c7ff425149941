#pragma once

#include "dtn/berezin.hpp"
#include "dtn/invariants.hpp"

#include <map>
#include <string>
#include <vector>

namespace dtn {

// Pi_k S Pi_k (order 1), plus the second-order correction
// sum_{k' != k} S_kk' S_k'k / (k - k') (order 2).
BlockOperator averaged_block(const DtNMatrix& A, int k, int order);

struct ClusterOptions {
  int k_min = 5;
  int k_max = -1;  // default floor(0.8 L)
};

struct ClusterSpectrum {
  std::map<int, std::vector<double>> mu;  // k -> sorted lambda - k
  int k_min = 0, k_max = 0;
  int alpha = 1;
  std::string route;  // "full" or "averaged"
  std::vector<int> ks() const;
};

// Dense eigenvalues of A, grouped by nearest integer. Throws NumericalGuard
// if a cluster in the window does not hold exactly 2k+1 eigenvalues.
ClusterSpectrum full_spectrum_clusters(const DtNMatrix& A, int alpha = 1, const ClusterOptions& opt = {});
// Eigenvalues of the averaged blocks over the same window.
ClusterSpectrum averaged_spectrum(const DtNMatrix& A, int order, int alpha = 1, const ClusterOptions& opt = {});

struct MomentSeries {
  std::string phi;
  int alpha = 1;
  std::vector<int> ks;
  std::vector<double> T;  // (1/(2k+1)) sum_j phi(k^alpha mu_kj)
};
MomentSeries moments(const ClusterSpectrum& spec, const TestFunction& phi, int alpha);

struct AsymptoticFit {
  std::vector<double> beta;  // coefficients of 1, 1/k, ..., 1/k^J
  double residual = 0;
  double condition = 0;
  bool ill_conditioned = false;
  nlohmann::ordered_json to_json() const;
};
AsymptoticFit asymptotic_fit(const MomentSeries& ms, int J = 2);

struct BoundReport {
  double normB = 0;       // |Lambda0 S + S Lambda0 + S^2|_2
  double max_defect = 0;  // max over windowed eigenvalues of min_k |lambda^2 - k^2|
  double slack = 0;
  bool holds = false;
  int checked = 0;
};
BoundReport cluster_bound_check(const DtNMatrix& A, const ClusterOptions& opt = {});

// CSV outputs: columns k, j, mu and k, T_k, with a leading comment line.
void write_spectrum_csv(const std::string& path, const ClusterSpectrum& spec, const std::string& header_comment);
void write_moments_csv(const std::string& path, const MomentSeries& ms, const std::string& header_comment);

}  // namespace dtn
