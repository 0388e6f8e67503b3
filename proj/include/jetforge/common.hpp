#pragma once
// Shared basic types and small utilities.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetforge {

using Real = double;
using Cplx = std::complex<Real>;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Real kTwoPi = 2.0 * kPi;

// Thread budget: bounded by JETFORGE_THREADS, defaults to hardware concurrency.
int thread_budget();

// Deterministic RNG (xoshiro256++). std::mt19937 would be deterministic too,
// but the standard distributions are not pinned across libstdc++ versions,
// so we roll the few samplers we need on top of raw 64-bit draws.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  uint64_t next_u64();
  Real uniform();                       // [0,1)
  Real uniform(Real lo, Real hi);
  Real normal();                        // Box-Muller on deterministic uniforms
 private:
  uint64_t s_[4];
  bool have_spare_ = false;
  Real spare_ = 0.0;
};

struct JfError : std::runtime_error {
  explicit JfError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checks that abort with a named failure (used for state invariants).
inline void require(bool ok, const std::string& what) {
  if (!ok) throw JfError(what);
}

// Least-squares slope of y against x.
Real fit_slope(const std::vector<Real>& x, const std::vector<Real>& y);

}  // namespace jetforge
