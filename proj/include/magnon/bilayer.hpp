#pragma once

// AA-stacked bilayer: H^b_phi = I (x) H_phi + K (x) I, compatible defect
// D = M (x) V, hybrid decomposition into joint eigenvectors of K and M,
// the embedded eigenvalue of Theorem 2, and the embedded-forcing response.
//
// Commuting K and M share an orthonormal eigenbasis xi^(1), xi^(2); each
// hybrid space { xi^(i) (x) u } is invariant, and the restriction of
// H^b + D to it is H_phi + kappa_i + mu_i V.

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "magnon/defect.hpp"
#include "magnon/hamiltonian.hpp"
#include "magnon/linalg.hpp"
#include "magnon/resolvent.hpp"
#include "magnon/spectral.hpp"

namespace magnon {

// Commuting Hermitian pair with joint eigendata, labeled kappa ascending
// (ties broken by mu ascending, then first-component phase xi_1 real >= 0).
struct InterlayerPair {
  Mat2 k, m;
  double kappa1 = 0, kappa2 = 0;
  double mu1 = 0, mu2 = 0;
  Vec2 xi1, xi2;
};

namespace detail {

inline Vec2 fix_phase(Vec2 v) {
  const cdouble lead = std::abs(v.x) > 1e-14 ? v.x : v.y;
  const double mag = std::abs(lead);
  if (mag > 0) {
    const cdouble ph = std::conj(lead) / mag;
    v = {v.x * ph, v.y * ph};
  }
  return v;
}

// orthonormal eigenbasis of one Hermitian 2x2
inline std::pair<Vec2, Vec2> eigenbasis2(const Mat2& a) {
  if (std::abs(a.b) < 1e-14) return {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  const double mean = 0.5 * (a.a.real() + a.d.real());
  const double h = std::sqrt(0.25 * (a.a.real() - a.d.real()) * (a.a.real() - a.d.real()) +
                             std::norm(a.b));
  auto vec_for = [&](double lam) {
    const Vec2 c1{a.b, cdouble(lam - a.a.real())};
    const Vec2 c2{cdouble(lam - a.d.real()), std::conj(a.b)};
    Vec2 v = norm2(c1) >= norm2(c2) ? c1 : c2;
    const double n = norm2(v);
    return Vec2{v.x / n, v.y / n};
  };
  return {vec_for(mean - h), vec_for(mean + h)};
}

}  // namespace detail

inline InterlayerPair hybridize(const Mat2& k, const Mat2& m) {
  if (k.hermiticity_defect() > 1e-12 || m.hermiticity_defect() > 1e-12)
    throw std::invalid_argument("hybridize requires Hermitian K and M");
  if (commutator_norm(k, m) > 1e-12)
    throw std::invalid_argument("hybridize: incompatible defect, [K, M] != 0 (norm " +
                                std::to_string(commutator_norm(k, m)) + ")");

  // diagonalize whichever matrix determines the basis; the other is then
  // automatically diagonal in it
  const double spread_k = (k - Mat2::identity().scaled(0.5 * k.trace().real())).frobenius_norm();
  const double spread_m = (m - Mat2::identity().scaled(0.5 * m.trace().real())).frobenius_norm();
  auto [x1, x2] = detail::eigenbasis2(spread_k >= spread_m ? k : m);

  auto rayleigh = [](const Mat2& a, const Vec2& v) { return dot(v, a * v).real(); };
  InterlayerPair out;
  out.k = k;
  out.m = m;
  out.xi1 = detail::fix_phase(x1);
  out.xi2 = detail::fix_phase(x2);
  out.kappa1 = rayleigh(k, out.xi1);
  out.kappa2 = rayleigh(k, out.xi2);
  out.mu1 = rayleigh(m, out.xi1);
  out.mu2 = rayleigh(m, out.xi2);
  const double cross = std::max(std::abs(dot(out.xi1, k * out.xi2)),
                                std::abs(dot(out.xi1, m * out.xi2)));
  if (cross > 1e-10)
    throw std::runtime_error("hybridize: joint eigenbasis defect " + std::to_string(cross));
  if (out.kappa1 > out.kappa2 || (out.kappa1 == out.kappa2 && out.mu1 > out.mu2)) {
    std::swap(out.kappa1, out.kappa2);
    std::swap(out.mu1, out.mu2);
    std::swap(out.xi1, out.xi2);
  }
  return out;
}

// Two lattice states on one shared region, one per layer.
class BilayerState {
 public:
  BilayerState(LatticeState layer1, LatticeState layer2)
      : l1_(std::move(layer1)), l2_(std::move(layer2)) {
    l1_.check_same_region(l2_);
  }
  explicit BilayerState(const RegionPtr& region) : l1_(region), l2_(region) {}

  const RegionPtr& region() const { return l1_.region(); }
  LatticeState& layer1() { return l1_; }
  LatticeState& layer2() { return l2_; }
  const LatticeState& layer1() const { return l1_; }
  const LatticeState& layer2() const { return l2_; }

  double norm() const { return std::hypot(l1_.norm(), l2_.norm()); }

  BilayerState& operator-=(const BilayerState& o) {
    l1_ -= o.l1_;
    l2_ -= o.l2_;
    return *this;
  }
  BilayerState& operator*=(cdouble c) {
    l1_ *= c;
    l2_ *= c;
    return *this;
  }

 private:
  LatticeState l1_, l2_;
};

inline BilayerState tensor_state(const Vec2& xi, const LatticeState& u) {
  LatticeState a = u, b = u;
  a *= xi.x;
  b *= xi.y;
  return BilayerState(std::move(a), std::move(b));
}

// <xi (x) . , s> taken layer-wise: the hybrid-i component of s.
inline LatticeState hybrid_component(const Vec2& xi, const BilayerState& s) {
  LatticeState out(s.region());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::conj(xi.x) * s.layer1()[i] + std::conj(xi.y) * s.layer2()[i];
  return out;
}

// (I (x) H_phi + K (x) I + M (x) V) applied to a bilayer state; pass
// std::nullopt for the defect-free operator.
inline BilayerState apply_bilayer(const Flux& flux, const Mat2& k,
                                  const std::optional<DefectSpec>& spec, const Mat2& m,
                                  const BilayerState& state) {
  BilayerState out(apply_H(flux, state.layer1()), apply_H(flux, state.layer2()));
  for (std::size_t i = 0; i < state.layer1().size(); ++i) {
    const cdouble u1 = state.layer1()[i];
    const cdouble u2 = state.layer2()[i];
    out.layer1()[i] += k.a * u1 + k.b * u2;
    out.layer2()[i] += k.c * u1 + k.d * u2;
  }
  if (spec) {
    add_defect_action(*spec, state.layer1(), out.layer1(), m.a);
    add_defect_action(*spec, state.layer2(), out.layer1(), m.b);
    add_defect_action(*spec, state.layer1(), out.layer2(), m.c);
    add_defect_action(*spec, state.layer2(), out.layer2(), m.d);
  }
  return out;
}

struct EmbeddedState {
  DefectSpec defect;  // V = W / mu_1, already scaled
  double kappa1 = 0, mu1 = 0;
  BilayerState state;  // xi^(1) (x) u, unit norm
  double residual = 0;
  DecayFit fit;
};

// Theorem-2 pipeline: run the single-layer construction at the shifted
// energy E0 - kappa_1, scale the defect by 1/mu_1, and lift the state into
// hybrid space 1.
inline EmbeddedState embedded_state(const Mat2& k, const Mat2& m, const Flux& flux, double e0,
                                    const Site& v, const Site& w, const RegionPtr& region,
                                    double tol = 1e-12, double margin = 0.1) {
  const InterlayerPair pair = hybridize(k, m);
  if (std::abs(pair.mu1) < 1e-12)
    throw std::domain_error("embedded_state requires mu_1 != 0");
  const double shifted = e0 - pair.kappa1;
  if (std::abs(shifted) <= 3.0 + margin)
    throw std::domain_error("embedded_state requires E0 outside [-3,3] + kappa_1 with margin " +
                            std::to_string(margin) + " (E0 - kappa_1 = " +
                            std::to_string(shifted) + ")");

  LatticeState u = response(flux, shifted, v, region, tol);
  const DefectSpec w_spec = build_defect(u, v, w);
  const DefectSpec v_spec = w_spec.scaled(1.0 / pair.mu1);

  const double un = u.norm();
  u *= 1.0 / un;
  BilayerState lifted = tensor_state(pair.xi1, u);
  BilayerState res = apply_bilayer(flux, k, v_spec, m, lifted);
  BilayerState scaled = lifted;
  scaled *= e0;
  res -= scaled;
  const double residual = res.norm() / lifted.norm();
  DecayFit fit = decay_fit(u, v);
  return EmbeddedState{v_spec, pair.kappa1, pair.mu1, std::move(lifted), residual, fit};
}

// Membership of E0 in the shifted continua sigma_c(H_phi) + kappa_i at
// rational flux, with distance to the nearest band edge.
struct EmbeddingReport {
  double e0 = 0;
  double kappa1 = 0, kappa2 = 0;
  bool inside1 = false, inside2 = false;
  double dist1 = 0, dist2 = 0;  // 0 when inside
};

inline EmbeddingReport embedding_check(double e0, const Flux& flux, const Mat2& k,
                                       int kgrid = 24) {
  if (!flux.is_rational())
    throw std::invalid_argument("embedding_check requires rational flux p/q");
  const InterlayerPair pair = hybridize(k, Mat2::identity());
  const BandUnion u = band_union(band_structure(flux, kgrid, kgrid));
  EmbeddingReport rep;
  rep.e0 = e0;
  rep.kappa1 = pair.kappa1;
  rep.kappa2 = pair.kappa2;
  rep.inside1 = u.contains(e0 - pair.kappa1);
  rep.inside2 = u.contains(e0 - pair.kappa2);
  rep.dist1 = u.distance(e0 - pair.kappa1);
  rep.dist2 = u.distance(e0 - pair.kappa2);
  return rep;
}

struct ForcedResponse {
  BilayerState state;
  DecayFit fit;
};

// Response of the defect-free bilayer to a hybrid-1 forcing: decays
// exponentially even when E sits inside the hybrid-2 continuum, because
// the hybrid spaces do not interact.
inline ForcedResponse forced_response(const Flux& flux, const Mat2& k, double e,
                                      const BilayerState& f, double tol = 1e-12) {
  const InterlayerPair pair = hybridize(k, Mat2::identity());
  const LatticeState g1 = hybrid_component(pair.xi1, f);
  const LatticeState g2 = hybrid_component(pair.xi2, f);
  const double fn = f.norm();
  if (fn == 0) throw std::invalid_argument("forced_response requires a nonzero forcing");
  if (g2.norm() > 1e-12 * fn)
    throw std::domain_error("forced_response: forcing has a hybrid-2 component (norm " +
                            std::to_string(g2.norm() / fn) + " relative)");
  if (std::abs(e - pair.kappa1) <= 3.0)
    throw std::domain_error("forced_response requires |E - kappa_1| > 3 (E - kappa_1 = " +
                            std::to_string(e - pair.kappa1) + ")");

  const LatticeState u = neumann_solve(flux, e - pair.kappa1, g1, tol).u;
  // fit about the strongest forcing site
  std::size_t imax = 0;
  for (std::size_t i = 1; i < g1.size(); ++i)
    if (std::abs(g1[i]) > std::abs(g1[imax])) imax = i;
  DecayFit fit = decay_fit(u, f.region()->sites()[imax]);
  return ForcedResponse{tensor_state(pair.xi1, u), fit};
}

// CSV: `layer,n1,n2,sublattice,re,im`, layer 1 block then layer 2 block,
// each in enumeration order.
inline void write_bilayer_csv(const BilayerState& s, std::ostream& os) {
  os << "layer,n1,n2,sublattice,re,im\n";
  const auto& sites = s.region()->sites();
  for (int layer = 1; layer <= 2; ++layer) {
    const LatticeState& u = layer == 1 ? s.layer1() : s.layer2();
    for (std::size_t i = 0; i < sites.size(); ++i)
      os << layer << ',' << sites[i].n1 << ',' << sites[i].n2 << ','
         << (sites[i].sub == Sub::A ? 'A' : 'B') << ',' << fmt17(u[i].real()) << ','
         << fmt17(u[i].imag()) << '\n';
  }
}

}  // namespace magnon
