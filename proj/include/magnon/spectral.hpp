#pragma once

// Dense Hermitian eigensolver (cyclic complex Jacobi), magnetic Bloch
// matrices at rational flux, band structures, and the Hofstadter butterfly.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "magnon/hamiltonian.hpp"
#include "magnon/io.hpp"
#include "magnon/linalg.hpp"
#include "magnon/parallel.hpp"

namespace magnon {

struct EigenSystem {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // orthonormal eigenvectors in the columns
};

// Cyclic complex Jacobi with an off-diagonal Frobenius-norm threshold of
// 1e-13 (relative to ||A||_F) and a sweep cap of 40.  Unconditionally
// robust for Hermitian input and produces orthonormal eigenvectors without
// a separate pass.
inline EigenSystem hermitian_eigen(const CMatrix& a_in, double herm_tol = 1e-12) {
  const std::size_t n = a_in.dim();
  if (n == 0) return {{}, CMatrix(0)};
  if (a_in.hermiticity_defect() > herm_tol)
    throw std::invalid_argument("hermitian_eigen: input is not Hermitian within tolerance");

  CMatrix a = a_in;
  CMatrix vt = CMatrix::identity(n);  // rows of vt are the eigenvectors
  const double scale = std::max(1.0, a.frobenius_norm());
  const double threshold = 1e-13 * scale;
  const double skip = threshold / (static_cast<double>(n) + 1.0);

  auto off_norm = [&] {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < 40 && off_norm() > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cdouble apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= skip) continue;
        const double alpha = a(p, p).real();
        const double beta = a(q, q).real();
        const double theta = std::arg(apq);
        const double rot = 0.5 * std::atan2(2.0 * mag, alpha - beta);
        const double c = std::cos(rot);
        const double s = std::sin(rot);
        const cdouble eip = std::polar(1.0, theta);   // e^{+i theta}
        const cdouble eim = std::conj(eip);           // e^{-i theta}

        // A <- U' A U with U = [[c, -s], [s e^{-i theta}, c e^{-i theta}]]
        cdouble* rp = a.row(p);
        cdouble* rq = a.row(q);
        for (std::size_t j = 0; j < n; ++j) {
          const cdouble xp = rp[j];
          const cdouble xq = rq[j];
          rp[j] = c * xp + s * eip * xq;
          rq[j] = -s * xp + c * eip * xq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (j == p || j == q) continue;
          a(j, p) = std::conj(rp[j]);
          a(j, q) = std::conj(rq[j]);
        }
        a(p, p) = c * c * alpha + s * s * beta + 2.0 * c * s * mag;
        a(q, q) = s * s * alpha + c * c * beta - 2.0 * c * s * mag;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        cdouble* vp = vt.row(p);
        cdouble* vq = vt.row(q);
        for (std::size_t j = 0; j < n; ++j) {
          const cdouble xp = vp[j];
          const cdouble xq = vq[j];
          vp[j] = c * xp + s * eim * xq;
          vq[j] = -s * xp + c * eim * xq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenSystem out;
  out.values.resize(n);
  out.vectors = CMatrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t j = 0; j < n; ++j) out.vectors(j, k) = vt(order[k], j);
  }
  return out;
}

// Zero-field dispersion E = +-|1 + e^{ik1} + e^{ik2}|.
inline std::pair<double, double> zero_field_dispersion(double k1, double k2) {
  const cdouble f = 1.0 + std::polar(1.0, k1) + std::polar(1.0, k2);
  const double m = std::abs(f);
  return {-m, m};
}

// Magnetic Bloch matrix at phi = 2 pi p/q: H_phi commutes with shifts by
// (q, 0) and (0, 1), so the magnetic unit cell holds q cells along e1.
// Basis: psi_A(0..q-1) then psi_B(0..q-1); e^{i k1} is picked up across the
// q-cell boundary and e^{i k2} on every e2 hop.  Acceptance for this
// construction is the torus-consistency oracle, verified in the tests.
inline CMatrix bloch_matrix(const Flux& flux, double k1, double k2) {
  if (!flux.is_rational())
    throw std::invalid_argument("bloch_matrix requires rational flux p/q");
  const std::size_t q = static_cast<std::size_t>(flux.q());
  CMatrix m(2 * q);
  const cdouble z2 = std::polar(1.0, k2);
  for (std::size_t r = 0; r < q; ++r) {
    // A-row r: couples psi_B(r) and psi_B(r+1 mod q)
    m(r, q + r) += 1.0 + z2 * flux.phase(-static_cast<std::int64_t>(r));
    m(r, q + (r + 1) % q) += (r + 1 < q) ? cdouble{1.0, 0.0} : std::polar(1.0, k1);
  }
  for (std::size_t r = 0; r < q; ++r)
    for (std::size_t j = 0; j < q; ++j) m(q + j, r) = std::conj(m(r, q + j));
  return m;
}

struct BandData {
  Flux flux;  // rational p/q
  int m1 = 0, m2 = 0;
  struct Band {
    double emin, emax;
  };
  std::vector<Band> bands;                   // 2q intervals by band index
  std::vector<std::vector<double>> samples;  // per band, sorted ascending
};

namespace detail {

inline BandData band_structure_impl(const Flux& flux, int m1, int m2, bool parallel) {
  if (!flux.is_rational())
    throw std::invalid_argument("band_structure requires rational flux p/q");
  if (m1 < 4 || m2 < 4) throw std::invalid_argument("band_structure requires m1, m2 >= 4");
  const std::size_t nb = 2 * static_cast<std::size_t>(flux.q());
  const std::size_t nk = static_cast<std::size_t>(m1) * static_cast<std::size_t>(m2);
  std::vector<std::vector<double>> grid(nk);
  auto job = [&](std::size_t t) {
    const int i = static_cast<int>(t) / m2;
    const int j = static_cast<int>(t) % m2;
    const double k1 = 2.0 * std::numbers::pi * i / m1;  // includes k = (0,0)
    const double k2 = 2.0 * std::numbers::pi * j / m2;
    grid[t] = hermitian_eigen(bloch_matrix(flux, k1, k2)).values;
  };
  if (parallel) {
    parallel_for(nk, job);
  } else {
    for (std::size_t t = 0; t < nk; ++t) job(t);
  }

  BandData out;
  out.flux = flux;
  out.m1 = m1;
  out.m2 = m2;
  out.bands.resize(nb);
  out.samples.assign(nb, {});
  for (std::size_t b = 0; b < nb; ++b) {
    auto& s = out.samples[b];
    s.reserve(nk);
    for (std::size_t t = 0; t < nk; ++t) s.push_back(grid[t][b]);
    std::sort(s.begin(), s.end());
    out.bands[b] = {s.front(), s.back()};
  }
  return out;
}

}  // namespace detail

// Diagonalize the Bloch matrix on the uniform (m1 x m2) k-grid over
// [0, 2pi)^2; band b's interval is [min, max] of the b-th ascending
// eigenvalue over the grid.
inline BandData band_structure(const Flux& flux, int m1, int m2) {
  return detail::band_structure_impl(flux, m1, m2, /*parallel=*/true);
}

// All reduced fractions p/q in [0, 1] with q <= qmax, ascending.
inline std::vector<Flux> farey_fluxes(int qmax) {
  if (qmax < 1) throw std::invalid_argument("farey_fluxes requires qmax >= 1");
  std::vector<Flux> out;
  for (std::int64_t q = 1; q <= qmax; ++q)
    for (std::int64_t p = 0; p <= q; ++p)
      if (std::gcd(p, q) == 1) out.push_back(Flux::rational(p, q));
  std::sort(out.begin(), out.end(),
            [](const Flux& a, const Flux& b) { return a.p() * b.q() < b.p() * a.q(); });
  return out;
}

// One BandData per Farey fraction, in ascending p/q order.  Parallel over
// flux values; the merge is slot-indexed, so output is identical for any
// worker count.
inline std::vector<BandData> butterfly(int qmax, int m1, int m2) {
  const std::vector<Flux> fluxes = farey_fluxes(qmax);
  std::vector<BandData> out(fluxes.size());
  parallel_for(fluxes.size(), [&](std::size_t i) {
    out[i] = detail::band_structure_impl(fluxes[i], m1, m2, /*parallel=*/false);
  });
  return out;
}

// Merged band intervals with optional fattening, for membership queries.
struct BandUnion {
  std::vector<std::pair<double, double>> intervals;  // disjoint, ascending

  bool contains(double e) const {
    for (const auto& [lo, hi] : intervals)
      if (lo <= e && e <= hi) return true;
    return false;
  }
  // 0 inside; otherwise distance to the nearest interval edge
  double distance(double e) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : intervals) {
      if (lo <= e && e <= hi) return 0.0;
      best = std::min(best, std::min(std::abs(e - lo), std::abs(e - hi)));
    }
    return best;
  }
};

inline BandUnion band_union(const BandData& bd, double fatten = 0.0) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(bd.bands.size());
  for (const auto& b : bd.bands) iv.emplace_back(b.emin - fatten, b.emax + fatten);
  std::sort(iv.begin(), iv.end());
  BandUnion u;
  for (const auto& [lo, hi] : iv) {
    if (!u.intervals.empty() && lo <= u.intervals.back().second)
      u.intervals.back().second = std::max(u.intervals.back().second, hi);
    else
      u.intervals.emplace_back(lo, hi);
  }
  return u;
}

// CSV schema: header `p,q,alpha,band_index,emin,emax`, one row per band
// interval, 17 significant digits, LF line endings.
inline void write_butterfly_csv(const std::vector<BandData>& data, std::ostream& os) {
  os << "p,q,alpha,band_index,emin,emax\n";
  for (const BandData& bd : data)
    for (std::size_t b = 0; b < bd.bands.size(); ++b)
      os << bd.flux.p() << ',' << bd.flux.q() << ',' << fmt17(bd.flux.alpha()) << ',' << b
         << ',' << fmt17(bd.bands[b].emin) << ',' << fmt17(bd.bands[b].emax) << '\n';
}

}  // namespace magnon
