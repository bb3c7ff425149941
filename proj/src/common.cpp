#include "dtn/common.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace dtn {

namespace {
std::atomic<int> g_threads{1};
thread_local bool t_in_worker = false;  // nested loops run serially
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads()), n);
  if (nt <= 1 || t_in_worker) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    t_in_worker = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace {
template <class T>
T pairwise(const T* x, std::size_t n) {
  if (n <= 8) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(x, h) + pairwise(x + h, n - h);
}
}  // namespace

double pairwise_sum(const double* x, std::size_t n) { return pairwise(x, n); }
cplx pairwise_sum(const cplx* x, std::size_t n) { return pairwise(x, n); }

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* b = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void orthonormal_completion(const Vec3& n, Vec3& u, Vec3& v) {
  // pick the coordinate axis least aligned with n
  Vec3 a = Vec3::UnitX();
  if (std::abs(n.x()) > std::abs(n.y()) || std::abs(n.x()) > std::abs(n.z())) {
    a = std::abs(n.y()) < std::abs(n.z()) ? Vec3::UnitY() : Vec3::UnitZ();
  }
  u = (a - a.dot(n) * n).normalized();
  v = n.cross(u);
}

}  // namespace dtn
