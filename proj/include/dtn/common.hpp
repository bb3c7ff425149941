#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtn {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

constexpr double kPi = 3.14159265358979323846264338327950288;

// Raised when a documented precondition of an operation is violated.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a request would exceed the configured node or memory budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for inputs outside the mathematical domain (e.g. zero momentum).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Raised when a numerical sanity guard trips (asymmetry, cluster overlap, ...).
struct NumericalGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Worker count used by parallel_for. Results never depend on it: every task
// writes into its own slot and reductions happen afterwards in index order.
void set_threads(int n);
int threads();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Pairwise summation, used wherever many terms are reduced.
double pairwise_sum(const double* x, std::size_t n);
cplx pairwise_sum(const cplx* x, std::size_t n);

// FNV-1a, used for config and potential fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ULL);
std::string hex64(std::uint64_t h);
// Shortest decimal form that reads back to the same double.
std::string shortest(double v);

// Orthonormal pair (u, v) with u x v = n for a unit vector n.
void orthonormal_completion(const Vec3& n, Vec3& u, Vec3& v);

}  // namespace dtn
