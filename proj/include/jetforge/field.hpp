#pragma once
// Uniform periodic grids on [0,2pi)^3 and sampled fields living on them.

#include <cstddef>
#include <functional>

#include "jetforge/common.hpp"

namespace jetforge {

enum class Rank { scalar = 0, vector3 = 1, symtensor3 = 2 };

inline int rank_comps(Rank r) {
  switch (r) {
    case Rank::scalar: return 1;
    case Rank::vector3: return 3;
    case Rank::symtensor3: return 6;
  }
  return 0;
}

// Symmetric tensor component order: xx yy zz xy xz yz.
inline int sym_index(int i, int j) {
  if (i == j) return i;
  int a = i < j ? i : j, b = i < j ? j : i;  // (0,1)->3 (0,2)->4 (1,2)->5
  if (a == 0 && b == 1) return 3;
  if (a == 0 && b == 2) return 4;
  return 5;
}

struct Grid3 {
  int n = 0;            // samples per axis
  Real box = kTwoPi;    // box edge length (always 2pi here)

  std::size_t n3() const { return std::size_t(n) * n * n; }
  Real dx() const { return box / n; }
  Real cell_volume() const { return dx() * dx() * dx(); }
  Real volume() const { return box * box * box; }
  // x-fastest linear index
  std::size_t idx(int i, int j, int k) const {
    return (std::size_t(k) * n + j) * n + i;
  }
  Real coord(int i) const { return box * i / n; }
  bool operator==(const Grid3& o) const { return n == o.n && box == o.box; }
};

// A sampled field. Storage is component-major (each component contiguous).
// A default-constructed data-less field with a grid is an explicit zero field;
// arithmetic helpers below honor that to keep empty pipeline stages cheap.
class Field {
 public:
  Field() = default;
  Field(const Grid3& g, Rank r, bool trace_free = false)
      : grid(g), rank(r), trace_free(trace_free),
        data(std::size_t(rank_comps(r)) * g.n3(), 0.0) {}

  static Field zero(const Grid3& g, Rank r, bool trace_free = false) {
    Field f;
    f.grid = g;
    f.rank = r;
    f.trace_free = trace_free;
    return f;
  }

  bool is_zero() const { return data.empty(); }
  void materialize() {
    if (is_zero()) data.assign(std::size_t(comps()) * grid.n3(), 0.0);
  }

  int comps() const { return rank_comps(rank); }
  std::size_t n3() const { return grid.n3(); }
  Real* comp(int c) { return data.data() + std::size_t(c) * n3(); }
  const Real* comp(int c) const { return data.data() + std::size_t(c) * n3(); }
  Real& at(int c, std::size_t i) { return data[std::size_t(c) * n3() + i]; }
  Real at(int c, std::size_t i) const {
    return is_zero() ? 0.0 : data[std::size_t(c) * n3() + i];
  }

  Grid3 grid;
  Rank rank = Rank::scalar;
  bool trace_free = false;
  std::vector<Real> data;
};

// Sample an analytic function f(x,y,z,comp) onto a field.
Field sample_field(const Grid3& g, Rank r,
                   const std::function<Real(Real, Real, Real, int)>& f);

// y += a*x  (handles zero-flagged operands)
void axpy(Field& y, Real a, const Field& x);
Field add(const Field& a, const Field& b);
Field sub(const Field& a, const Field& b);
void scale(Field& f, Real a);
// component-wise mean over the grid
std::vector<Real> field_mean(const Field& f);

}  // namespace jetforge
