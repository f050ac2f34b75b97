#pragma once

// Neumann-series solves of (H_phi - E) u = f for |E| > 3, the 2x2 Green
// block at a defect pair, and exponential-decay certification.
//
// The series u = -E^{-1} sum_l (H/E)^l f converges geometrically because
// ||H_phi|| <= 3 holds on every truncation (Gershgorin).  Working on the
// lattice side gives the same bound as the Fourier-side series, with no
// transform machinery.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "magnon/hamiltonian.hpp"
#include "magnon/lattice.hpp"
#include "magnon/linalg.hpp"
#include "magnon/parallel.hpp"

namespace magnon {

// Region radius for a target truncation error: r = (|E|-1)/2 bounds the
// per-hop decay, so r^{-N} < tol at N = ln(1/tol)/ln(r), plus a safety
// margin of 5 shells.
inline int recommended_radius(double e, double tol) {
  const double r = (std::abs(e) - 1.0) / 2.0;
  if (r <= 1.0)
    throw std::domain_error("recommended_radius requires |E| > 3 (outside convergence region)");
  if (tol <= 0 || tol >= 1) throw std::invalid_argument("recommended_radius requires 0 < tol < 1");
  return static_cast<int>(std::ceil(std::log(1.0 / tol) / std::log(r))) + 5;
}

struct NeumannResult {
  LatticeState u;
  std::size_t terms = 0;
  double max_term_ratio = 0;  // max ||t_{l+1}|| / ||t_l||, always <= 3/|E|
};

namespace detail {

// Shared driver: runs the series for several right-hand sides at once so
// the Green-block columns reuse one stencil pass per term.
inline std::vector<NeumannResult> neumann_solve_multi(const Flux& flux, double e,
                                                      const std::vector<const LatticeState*>& fs,
                                                      double tol, std::size_t max_terms) {
  if (std::abs(e) <= 3.0)
    throw std::domain_error("neumann_solve requires |E| > 3 (outside convergence region): E = " +
                            std::to_string(e));
  if (tol <= 0) throw std::invalid_argument("neumann_solve requires tol > 0");
  if (fs.empty()) return {};
  const RegionPtr region = fs[0]->region();
  for (const auto* f : fs) f->check_same_region(*fs[0]);
  const Region& reg = *region;
  const PhaseTable phases(flux, reg);
  const double inv_e = 1.0 / e;

  struct Work {
    std::vector<cdouble> term, next, u;
    double prev_norm = 0, u_norm = 0, max_ratio = 0;
    std::size_t terms = 0;
    bool done = false;
  };
  std::vector<Work> work(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) {
    Work& w = work[k];
    w.term = fs[k]->amplitudes();
    for (auto& v : w.term) v *= -inv_e;  // t_0 = -f/E
    w.next.resize(w.term.size());
    w.u = w.term;
    w.prev_norm = norm2(w.term);
    w.u_norm = norm2(w.u);
    w.terms = 1;
    if (w.prev_norm == 0) w.done = true;  // zero forcing: zero response
  }

  for (std::size_t it = 0; it < max_terms; ++it) {
    bool all_done = true;
    for (Work& w : work) {
      if (w.done) continue;
      all_done = false;
      apply_stencil(reg, phases, w.term, w.next);  // t_{l+1} = (H/E) t_l
      for (auto& v : w.next) v *= inv_e;
      std::swap(w.term, w.next);
      const double tn = norm2(w.term);
      if (w.prev_norm > 0) w.max_ratio = std::max(w.max_ratio, tn / w.prev_norm);
      w.prev_norm = tn;
      for (std::size_t i = 0; i < w.u.size(); ++i) w.u[i] += w.term[i];
      w.u_norm = norm2(w.u);
      ++w.terms;
      if (tn < tol * w.u_norm) w.done = true;
    }
    if (all_done) break;
  }
  for (const Work& w : work)
    if (!w.done)
      throw std::runtime_error("neumann_solve: iteration cap of " + std::to_string(max_terms) +
                               " terms exceeded");

  std::vector<NeumannResult> out;
  out.reserve(fs.size());
  for (Work& w : work) {
    NeumannResult r{LatticeState(region), w.terms, w.max_ratio};
    r.u.amplitudes() = std::move(w.u);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

// Solve (H_phi - E) u = f, truncating when the term norm drops below
// tol * ||u||; the geometric tail then bounds the residual by
// 3 tol ||f|| / (1 - 3/|E|).
inline NeumannResult neumann_solve(const Flux& flux, double e, const LatticeState& f,
                                   double tol = 1e-12, std::size_t max_terms = 1000000) {
  auto res = detail::neumann_solve_multi(flux, e, {&f}, tol, max_terms);
  return std::move(res[0]);
}

// G_{xy} = <delta_x, (H_phi - E)^{-1} delta_y> on the pair {v, w}.
struct GreenBlock {
  Site v, w;
  double e = 0;
  Mat2 g;  // rows/columns ordered (v, w)
};

// Columns are the Neumann responses to delta_v and delta_w restricted to
// {v, w}.  The region must keep the truncation estimate r^{-d(boundary)}
// below trunc_guard; the guard is a coarse fidelity check (tighten it when
// the infinite-lattice value matters, cf. recommended_radius).
inline GreenBlock green_block(const Flux& flux, double e, const Site& v, const Site& w,
                              const RegionPtr& region, double tol = 1e-12,
                              double trunc_guard = 1e-2) {
  bool adjacent = false;
  for (const Hop& h : neighbors(v)) adjacent |= (h.to == w);
  if (!adjacent) throw std::invalid_argument("green_block requires adjacent sites v, w");
  if (!region->contains(v) || !region->contains(w))
    throw std::invalid_argument("green_block: defect sites outside region");
  if (std::abs(e) <= 3.0)
    throw std::domain_error("green_block requires |E| > 3 (outside convergence region): E = " +
                            std::to_string(e));
  const double r = (std::abs(e) - 1.0) / 2.0;
  const int d = std::min(region->boundary_distance(v), region->boundary_distance(w));
  if (std::pow(r, -d) >= trunc_guard)
    throw std::domain_error("green_block: region too small (r^-d = " +
                            std::to_string(std::pow(r, -d)) + " with r = " + std::to_string(r) +
                            ", d = " + std::to_string(d) + ")");

  const LatticeState fv = LatticeState::delta(region, v);
  const LatticeState fw = LatticeState::delta(region, w);
  std::vector<NeumannResult> cols(2, NeumannResult{LatticeState(region), 0, 0});
  // the two columns are independent solves
  parallel_for(2, [&](std::size_t k) {
    cols[k] = neumann_solve(flux, e, k == 0 ? fv : fw, tol);
  });

  GreenBlock gb{v, w, e, {}};
  gb.g.a = cols[0].u.at(v);
  gb.g.c = cols[0].u.at(w);
  gb.g.b = cols[1].u.at(v);
  gb.g.d = cols[1].u.at(w);
  if (gb.g.hermiticity_defect() > 1e-10)
    throw std::runtime_error("green_block: computed block is not Hermitian within 1e-10");
  return gb;
}

// Exponential-decay certificate fitted on shell maxima.
struct DecayFit {
  double gamma = 0;      // decay rate per hop (negated slope)
  double prefactor = 0;  // exp(intercept)
  double residual = 0;   // RMS residual of the log-linear fit
  int shells_used = 0;
};

// Least-squares fit of log max-shell amplitude against hop distance from
// `center`.  Shell maxima (not per-site values) avoid sublattice
// oscillation artifacts; shells below `floor` are discarded.
inline DecayFit decay_fit(const LatticeState& u, const Site& center, double floor = 1e-14) {
  if (u.norm() == 0) throw std::invalid_argument("decay_fit requires a nonzero state");
  const std::vector<int> dist = u.region()->hop_distances(center);
  std::vector<double> shell_max;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < 0) continue;
    if (shell_max.size() <= static_cast<std::size_t>(dist[i]))
      shell_max.resize(static_cast<std::size_t>(dist[i]) + 1, 0.0);
    shell_max[static_cast<std::size_t>(dist[i])] =
        std::max(shell_max[static_cast<std::size_t>(dist[i])], std::abs(u[i]));
  }
  std::vector<std::pair<double, double>> pts;  // (d, log max)
  for (std::size_t d = 0; d < shell_max.size(); ++d)
    if (shell_max[d] > floor) pts.emplace_back(static_cast<double>(d), std::log(shell_max[d]));
  if (pts.size() < 3)
    throw std::runtime_error("decay_fit: fewer than 3 usable shells above the amplitude floor");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double npts = static_cast<double>(pts.size());
  const double denom = npts * sxx - sx * sx;
  const double slope = (npts * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / npts;
  double rss = 0;
  for (const auto& [x, y] : pts) {
    const double e = y - (slope * x + intercept);
    rss += e * e;
  }
  DecayFit fit;
  fit.gamma = -slope;
  fit.prefactor = std::exp(intercept);
  fit.residual = std::sqrt(rss / npts);
  fit.shells_used = static_cast<int>(pts.size());
  return fit;
}

}  // namespace magnon
