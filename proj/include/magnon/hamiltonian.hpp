#pragma once

// The single-layer magnetic Hamiltonian H_phi on truncated regions and
// tori, plus gauge transformations.
//
//   (H u)_A(n) = u_B(n) + u_B(n+e1) + e^{-i n1 phi} u_B(n+e2)
//   (H u)_B(n) = u_A(n) + u_A(n-e1) + e^{+i n1 phi} u_A(n-e2)
//
// ||H_phi|| <= 3 (Gershgorin: every row has three unit-modulus entries).
// With S = diag(+1 on A, -1 on B), S H S = -H exactly, so all spectra are
// symmetric about zero.

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magnon/io.hpp"
#include "magnon/lattice.hpp"
#include "magnon/linalg.hpp"

namespace magnon {

// Magnetic flux per hexagonal face.  Rational flux phi = 2*pi*p/q keeps
// the exponent arithmetic in integers: phase(m) reduces m*p mod q before
// taking cos/sin, so H at p/q and (p+q)/q are identical bit for bit.
class Flux {
 public:
  static Flux real(double phi) {
    Flux f;
    f.rational_ = false;
    f.phi_ = phi;
    return f;
  }

  static Flux rational(std::int64_t p, std::int64_t q) {
    if (q < 1) throw std::invalid_argument("Flux::rational requires q >= 1");
    std::int64_t g = std::gcd(p < 0 ? -p : p, q);
    if (g > 1) {
      p /= g;
      q /= g;
    }
    Flux f;
    f.rational_ = true;
    f.p_ = p;
    f.q_ = q;
    f.phi_ = 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(q);
    return f;
  }

  bool is_rational() const { return rational_; }
  std::int64_t p() const { return p_; }
  std::int64_t q() const { return q_; }
  double radians() const { return phi_; }
  double alpha() const { return phi_ / (2.0 * std::numbers::pi); }

  // e^{i m phi}
  cdouble phase(std::int64_t m) const {
    if (!rational_) return std::polar(1.0, static_cast<double>(m) * phi_);
    std::int64_t r = (m % q_) * (p_ % q_) % q_;
    r %= q_;
    if (r < 0) r += q_;
    if (r == 0) return {1.0, 0.0};
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(q_));
  }

  friend bool operator==(const Flux& a, const Flux& b) {
    if (a.rational_ != b.rational_) return false;
    return a.rational_ ? (a.p_ == b.p_ && a.q_ == b.q_) : a.phi_ == b.phi_;
  }

 private:
  bool rational_ = true;
  double phi_ = 0;
  std::int64_t p_ = 0, q_ = 1;
};

// A state on a truncated region; amplitudes follow the region enumeration.
class LatticeState {
 public:
  explicit LatticeState(RegionPtr region)
      : region_(std::move(region)), amp_(region_->size()) {}

  static LatticeState delta(const RegionPtr& region, const Site& s) {
    LatticeState st(region);
    auto i = region->index_of(s);
    if (!i) throw std::invalid_argument("LatticeState::delta: site outside region");
    st.amp_[*i] = 1.0;
    return st;
  }

  const RegionPtr& region() const { return region_; }
  std::size_t size() const { return amp_.size(); }
  cdouble& operator[](std::size_t i) { return amp_[i]; }
  const cdouble& operator[](std::size_t i) const { return amp_[i]; }
  std::vector<cdouble>& amplitudes() { return amp_; }
  const std::vector<cdouble>& amplitudes() const { return amp_; }

  cdouble at(const Site& s) const {
    auto i = region_->index_of(s);
    return i ? amp_[*i] : cdouble{};
  }

  double norm() const { return norm2(amp_); }

  LatticeState& operator+=(const LatticeState& o) {
    check_same_region(o);
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] += o.amp_[i];
    return *this;
  }
  LatticeState& operator-=(const LatticeState& o) {
    check_same_region(o);
    for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] -= o.amp_[i];
    return *this;
  }
  LatticeState& operator*=(cdouble c) {
    for (auto& v : amp_) v *= c;
    return *this;
  }

  void check_same_region(const LatticeState& o) const {
    if (region_ != o.region_)
      throw std::invalid_argument("lattice states must share one Region instance");
  }

 private:
  RegionPtr region_;
  std::vector<cdouble> amp_;
};

inline cdouble dot(const LatticeState& a, const LatticeState& b) {
  a.check_same_region(b);
  return dot(a.amplitudes(), b.amplitudes());
}

enum class Boundary { Open };

namespace detail {

// Per-(flux, region) table of e^{i m phi} for every exponent the region
// can produce; phases are evaluated once, not per hop.
class PhaseTable {
 public:
  PhaseTable(const Flux& flux, const Region& region)
      : offset_(region.min_phase_exp()) {
    int span = region.max_phase_exp() - region.min_phase_exp() + 1;
    val_.reserve(static_cast<std::size_t>(span));
    for (int m = region.min_phase_exp(); m <= region.max_phase_exp(); ++m)
      val_.push_back(flux.phase(m));
  }
  cdouble operator()(int m) const { return val_[static_cast<std::size_t>(m - offset_)]; }

 private:
  int offset_;
  std::vector<cdouble> val_;
};

inline void apply_stencil(const Region& region, const PhaseTable& phases,
                          const std::vector<cdouble>& in, std::vector<cdouble>& out) {
  const std::size_t n = region.size();
  for (std::size_t i = 0; i < n; ++i) {
    cdouble s = 0;
    for (const auto& [j, m] : region.edges(i))
      if (j >= 0) s += phases(m) * in[static_cast<std::size_t>(j)];
    out[i] = s;
  }
}

}  // namespace detail

// Apply H_phi with hops leaving the region dropped (Open truncation).
inline LatticeState apply_H(const Flux& flux, const LatticeState& state,
                            Boundary = Boundary::Open) {
  const Region& region = *state.region();
  detail::PhaseTable phases(flux, region);
  LatticeState out(state.region());
  detail::apply_stencil(region, phases, state.amplitudes(), out.amplitudes());
  return out;
}

// Materialize the same operator as a dense Hermitian matrix, in the region
// enumeration.  Reserved for oracles and small verification instances.
inline CMatrix assemble_dense(const Flux& flux, const RegionPtr& region,
                              std::size_t site_cap = 20000) {
  if (region->size() > site_cap)
    throw std::invalid_argument("assemble_dense: region size " + std::to_string(region->size()) +
                                " exceeds cap " + std::to_string(site_cap));
  detail::PhaseTable phases(flux, *region);
  CMatrix h(region->size());
  for (std::size_t i = 0; i < region->size(); ++i)
    for (const auto& [j, m] : region->edges(i))
      if (j >= 0) h(i, static_cast<std::size_t>(j)) += phases(m);
  return h;
}

// Conjugation by the diagonal unitary diag(e^{i angle_x}): the spectrum and
// all off-diagonal moduli are unchanged.
inline CMatrix gauge_transform(const CMatrix& op, const std::vector<double>& angles) {
  if (angles.size() != op.dim())
    throw std::invalid_argument("gauge_transform: one angle per site required");
  std::vector<cdouble> u(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) u[i] = std::polar(1.0, angles[i]);
  CMatrix out(op.dim());
  for (std::size_t i = 0; i < op.dim(); ++i)
    for (std::size_t j = 0; j < op.dim(); ++j)
      out(i, j) = u[i] * op(i, j) * std::conj(u[j]);
  return out;
}

// Site enumeration on the (L1 x L2)-torus: cells row-major, A before B.
inline std::size_t torus_index(int L1, int L2, int n1, int n2, Sub sub) {
  n1 %= L1;
  if (n1 < 0) n1 += L1;
  n2 %= L2;
  if (n2 < 0) n2 += L2;
  return (static_cast<std::size_t>(n1) * static_cast<std::size_t>(L2) +
          static_cast<std::size_t>(n2)) * 2 + static_cast<std::size_t>(sub);
}

// Periodic wrap in both directions.  The Harper phase e^{-i n1 phi} is
// well-defined because n1 is taken mod L1 and q | L1.  Contributions
// accumulate, so small tori with coincident wrapped neighbors are valid.
inline CMatrix torus_hamiltonian(int L1, int L2, const Flux& flux) {
  if (!flux.is_rational())
    throw std::invalid_argument("torus_hamiltonian requires rational flux p/q");
  if (L1 < 1 || L2 < 1)
    throw std::invalid_argument("torus_hamiltonian requires L1, L2 >= 1");
  if (L1 % flux.q() != 0)
    throw std::invalid_argument("torus_hamiltonian requires q | L1 (q = " +
                                std::to_string(flux.q()) + ", L1 = " + std::to_string(L1) + ")");
  CMatrix h(2 * static_cast<std::size_t>(L1) * static_cast<std::size_t>(L2));
  for (int n1 = 0; n1 < L1; ++n1)
    for (int n2 = 0; n2 < L2; ++n2) {
      std::size_t a = torus_index(L1, L2, n1, n2, Sub::A);
      const std::pair<std::size_t, cdouble> hops[3] = {
          {torus_index(L1, L2, n1, n2, Sub::B), 1.0},
          {torus_index(L1, L2, n1 + 1, n2, Sub::B), 1.0},
          {torus_index(L1, L2, n1, n2 + 1, Sub::B), flux.phase(-n1)},
      };
      for (const auto& [b, amp] : hops) {
        h(a, b) += amp;
        h(b, a) += std::conj(amp);
      }
    }
  return h;
}

// Plain-text triplet dump: `row col re im`, 0-based, 17 significant digits,
// nonzeros only, rows sorted.
inline void dump_triplets(const CMatrix& m, std::ostream& os) {
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) {
      const cdouble& v = m(i, j);
      if (v != cdouble{})
        os << i << ' ' << j << ' ' << fmt17(v.real()) << ' ' << fmt17(v.imag()) << '\n';
    }
}

// Largest Gershgorin row bound: max_i sum_j |h_ij|.
inline double gershgorin_bound(const CMatrix& h) {
  double worst = 0;
  for (std::size_t i = 0; i < h.dim(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < h.dim(); ++j) row += std::abs(h(i, j));
    worst = std::max(worst, row);
  }
  return worst;
}

}  // namespace magnon
