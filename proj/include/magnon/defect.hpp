#pragma once

// Two-site defect construction: point-source response, the Hermitian
// defect matrix solving -V u = f on {v, w}, the secular determinant
// locating eigenvalues of H + V, and bound-state reconstruction.
//
// E is an eigenvalue of H + V exactly when det(I + V G(E)) = 0, where G
// is the 2x2 Green block on the defect pair; everything stays 2x2, which
// is what makes the defect-energy relation cheap to continue in phi.

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "magnon/hamiltonian.hpp"
#include "magnon/io.hpp"
#include "magnon/lattice.hpp"
#include "magnon/linalg.hpp"
#include "magnon/resolvent.hpp"

namespace magnon {

// Adjacent pair (v, w) with a Hermitian 2x2 defect matrix acting on it.
struct DefectSpec {
  Site v, w;
  Mat2 vtilde;

  DefectSpec(const Site& v_in, const Site& w_in, const Mat2& vt) : v(v_in), w(w_in), vtilde(vt) {
    if (v.sub != Sub::A) throw std::invalid_argument("DefectSpec: v must be an A-site");
    bool adjacent = false;
    for (const Hop& h : neighbors(v)) adjacent |= (h.to == w);
    if (!adjacent) throw std::invalid_argument("DefectSpec: v and w must be adjacent");
    if (vt.hermiticity_defect() > 1e-12)
      throw std::invalid_argument("DefectSpec: Vtilde must be Hermitian within 1e-12");
  }

  DefectSpec scaled(double s) const { return DefectSpec(v, w, vtilde.scaled(s)); }
};

// (V u) added into `out` with an overall weight: V acts only on {v, w}.
inline void add_defect_action(const DefectSpec& spec, const LatticeState& in, LatticeState& out,
                              cdouble weight = 1.0) {
  in.check_same_region(out);
  const auto iv = in.region()->index_of(spec.v);
  const auto iw = in.region()->index_of(spec.w);
  if (!iv || !iw) throw std::invalid_argument("defect sites outside region");
  const Vec2 a{in[*iv], in[*iw]};
  const Vec2 d = spec.vtilde * a;
  out[*iv] += weight * d.x;
  out[*iw] += weight * d.y;
}

// Response to the unit source at v: u = (H - E0)^{-1} delta_v.  The value
// u(v) is a diagonal resolvent entry at real energy, hence real.
inline LatticeState response(const Flux& flux, double e0, const Site& v, const RegionPtr& region,
                             double tol = 1e-12) {
  LatticeState u = neumann_solve(flux, e0, LatticeState::delta(region, v), tol).u;
  if (std::abs(u.at(v).imag()) > 1e-10)
    throw std::runtime_error("response: u(v) not real within 1e-10 (got imag " +
                             std::to_string(u.at(v).imag()) + ")");
  return u;
}

// Minimal-Frobenius-norm Hermitian solution of  Vt [u(v), u(w)]^t = [-1, 0]^t:
//   Vt = (b a* + a b*)/|a|^2 - (a*b) a a*/|a|^4,   b = (-1, 0).
// Solvable because a*b = -conj(u(v)) is real.
inline DefectSpec build_defect(const LatticeState& u, const Site& v, const Site& w) {
  const auto iv = u.region()->index_of(v);
  const auto iw = u.region()->index_of(w);
  if (!iv || !iw) throw std::invalid_argument("build_defect: defect sites outside region");
  const cdouble uv = u[*iv];
  const cdouble uw = u[*iw];
  const double na2 = std::norm(uv) + std::norm(uw);
  if (na2 < 1e-300)
    throw std::runtime_error(
        "build_defect: response vanishes at both defect sites "
        "(contradicts the point-source nonvanishing argument; check the region)");
  if (std::abs(uv.imag()) > 1e-8)
    throw std::runtime_error("build_defect: Im u(v) exceeds 1e-8, a*b is not real");

  const Vec2 a{uv, uw};
  const Vec2 b{-1.0, 0.0};
  const double ab = -uv.real();  // a*b, real by the check above
  Mat2 vt{
      b.x * std::conj(a.x) + a.x * std::conj(b.x),
      b.x * std::conj(a.y) + a.x * std::conj(b.y),
      b.y * std::conj(a.x) + a.y * std::conj(b.x),
      b.y * std::conj(a.y) + a.y * std::conj(b.y),
  };
  vt = vt.scaled(1.0 / na2);
  const Mat2 aa{std::conj(a.x) * a.x, a.x * std::conj(a.y), a.y * std::conj(a.x),
                std::conj(a.y) * a.y};
  vt = vt - aa.scaled(ab / (na2 * na2));
  return DefectSpec(v, w, vt);
}

// det(I + Vt G(E)), real for real E by the Sylvester identity; the
// imaginary part is checked against 1e-10 and then discarded.
inline double secular(const Flux& flux, double e, const DefectSpec& spec, const RegionPtr& region,
                      double tol = 1e-12, double trunc_guard = 1e-2) {
  const GreenBlock gb = green_block(flux, e, spec.v, spec.w, region, tol, trunc_guard);
  const Mat2 s = Mat2::identity() + spec.vtilde * gb.g;
  const cdouble det = s.det();
  if (std::abs(det.imag()) > 1e-10)
    throw std::runtime_error("secular: determinant not real within 1e-10 (imag = " +
                             std::to_string(det.imag()) + ")");
  return det.real();
}

struct BoundState {
  LatticeState u;       // normalized eigenstate of H + V at E
  double residual = 0;  // ||(H + V - E) u|| / ||u||
  DecayFit fit;
};

// Reconstruct the bound state at a secular root: the kernel vector of
// I + Vt G(E) is the forcing f = -V u on {v, w}; then u = (H - E)^{-1} f.
inline BoundState bound_state(const Flux& flux, const DefectSpec& spec, double e,
                              const RegionPtr& region, double tol = 1e-12,
                              double trunc_guard = 1e-2) {
  const GreenBlock gb = green_block(flux, e, spec.v, spec.w, region, tol, trunc_guard);
  const Mat2 s = Mat2::identity() + spec.vtilde * gb.g;

  // smallest singular pair of the 2x2 via S*S
  const Mat2 sts = s.adjoint() * s;
  const double m = 0.5 * (sts.a.real() + sts.d.real());
  const double h = std::sqrt(0.25 * (sts.a.real() - sts.d.real()) * (sts.a.real() - sts.d.real()) +
                             std::norm(sts.b));
  const double sig_max = std::sqrt(std::max(0.0, m + h));
  const double sig_min = std::sqrt(std::max(0.0, m - h));
  if (sig_max < 1e-12)
    throw std::runtime_error("bound_state: both singular values below 1e-12, degenerate defect");
  if (sig_min > 1e-6 * std::max(1.0, sig_max))
    throw std::runtime_error("bound_state: secular(E) not zero at E = " + std::to_string(e) +
                             " (smallest singular value " + std::to_string(sig_min) + ")");
  // eigenvector of S*S for the smaller eigenvalue
  const double lam = m - h;
  const Vec2 cand1{sts.b, cdouble(lam - sts.a.real())};
  const Vec2 cand2{cdouble(lam - sts.d.real()), std::conj(sts.b)};
  Vec2 c = norm2(cand1) >= norm2(cand2) ? cand1 : cand2;
  if (norm2(c) == 0) c = (sts.a.real() <= sts.d.real()) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  const double cn = norm2(c);
  c = {c.x / cn, c.y / cn};

  LatticeState f(region);
  f[*region->index_of(spec.v)] = c.x;
  f[*region->index_of(spec.w)] = c.y;
  LatticeState u = neumann_solve(flux, e, f, tol).u;

  // residual of (H + V - E) u
  LatticeState res = apply_H(flux, u);
  add_defect_action(spec, u, res);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= e * u[i];
  const double unorm = u.norm();
  const double residual = res.norm() / unorm;

  // deterministic normalization: unit norm, largest-|amplitude| entry real > 0
  std::size_t imax = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[imax])) imax = i;
  const cdouble phase = std::abs(u[imax]) > 0 ? u[imax] / std::abs(u[imax]) : cdouble(1.0);
  u *= std::conj(phase) / unorm;

  DecayFit fit = decay_fit(u, spec.v);
  return BoundState{std::move(u), residual, fit};
}

// CSV dump: `n1,n2,sublattice,re,im` in enumeration order.
inline void write_state_csv(const LatticeState& u, std::ostream& os) {
  os << "n1,n2,sublattice,re,im\n";
  const auto& sites = u.region()->sites();
  for (std::size_t i = 0; i < sites.size(); ++i)
    os << sites[i].n1 << ',' << sites[i].n2 << ',' << (sites[i].sub == Sub::A ? 'A' : 'B') << ','
       << fmt17(u[i].real()) << ',' << fmt17(u[i].imag()) << '\n';
}

}  // namespace magnon
