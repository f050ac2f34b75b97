#pragma once

// Continuation of the defect-energy relation E_phi across a flux interval:
// at each phi step the real secular function E -> det(I + W G(E - kappa_1))
// is bracketed near the previous root and refined by Brent's method;
// failed brackets trigger adaptive sub-stepping.  Every accepted sample is
// verified through the bound-state residual and the decay fit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "magnon/defect.hpp"
#include "magnon/io.hpp"
#include "magnon/spectral.hpp"

namespace magnon {

struct CurveSample {
  double phi = 0;
  double e = 0;
  double secular_residual = 0;  // |det| at the accepted root
  double state_residual = 0;    // ||(H + W - (E - kappa_1)) u|| / ||u||
  double gamma = 0;             // decay rate of the verified state
};

struct EnergyCurve {
  std::vector<CurveSample> samples;  // phi strictly increasing
  double kappa1 = 0, mu1 = 0;
  RegionPtr region;
};

struct CurveOptions {
  double margin = 0.1;           // keep |E - kappa_1| > 3 + margin
  double tol = 1e-12;            // Neumann tolerance
  double root_tol = 1e-12;       // Brent tolerance on E
  double bracket_window = 0.2;   // maximum bracket half-width around the prediction
  double trunc_guard = 1e-2;     // Green-block region guard
  int max_halvings = 10;
};

namespace detail {

// Brent's method on a sign-changing bracket [a, b].
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb, double tol_x,
                  int max_iter = 120) {
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) throw std::invalid_argument("brent_root: endpoints do not bracket");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * tol_x;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

}  // namespace detail

// Track the root of E -> secular(phi, E - kappa_1; mu_1 V) from phi_a to
// phi_b on a uniform grid of `steps` intervals, seeded at (phi_a, e_seed).
inline EnergyCurve track_curve(const DefectSpec& spec, double kappa1, double mu1, double phi_a,
                               double phi_b, int steps, double e_seed, const RegionPtr& region,
                               CurveOptions opts = {}) {
  if (steps < 1) throw std::invalid_argument("track_curve requires steps >= 1");
  if (!(phi_b > phi_a)) throw std::invalid_argument("track_curve requires phi_b > phi_a");
  const DefectSpec w_spec = spec.scaled(mu1);  // channel-1 defect W = mu_1 V

  auto sec = [&](double phi, double e) {
    return secular(Flux::real(phi), e - kappa1, w_spec, region, opts.tol, opts.trunc_guard);
  };
  auto check_margin = [&](double e) {
    if (std::abs(e - kappa1) <= 3.0 + opts.margin)
      throw std::runtime_error("track_curve: curve approaches band edge (|E - kappa_1| = " +
                               std::to_string(std::abs(e - kappa1)) + " <= 3 + margin)");
  };

  if (std::abs(sec(phi_a, e_seed)) > 1e-9)
    throw std::invalid_argument("track_curve: seed does not satisfy secular(phi_a, E_seed) = 0 "
                                "within 1e-9");

  // refine the root at fixed phi, starting from a predicted location
  auto refine = [&](double phi, double predicted, bool& found) {
    std::map<double, double> cache;  // E -> secular
    auto eval = [&](double e) {
      auto it = cache.find(e);
      if (it != cache.end()) return it->second;
      const double val = sec(phi, e);
      cache.emplace(e, val);
      return val;
    };
    const double f0 = eval(predicted);
    for (double h = opts.bracket_window / 16.0; h <= opts.bracket_window * (1.0 + 1e-12);
         h *= 2.0) {
      for (const double sgn : {+1.0, -1.0}) {
        const double edge = predicted + sgn * h;
        const double fe = eval(edge);
        if ((fe > 0) != (f0 > 0) || fe == 0) {
          found = true;
          const double lo = std::min(predicted, edge);
          const double hi = std::max(predicted, edge);
          const double root = detail::brent_root([&](double x) { return eval(x); }, lo, hi,
                                                 eval(lo), eval(hi), opts.root_tol);
          if (std::abs(eval(root)) > 1e-9) {
            found = false;  // ill-conditioned root: treat as a failed bracket
            return predicted;
          }
          return root;
        }
      }
    }
    found = false;
    return predicted;
  };

  // continuation substep with adaptive halving
  std::function<double(double, double, double, double, int)> advance =
      [&](double phi_from, double e_from, double slope, double phi_to, int depth) -> double {
    const double predicted = e_from + slope * (phi_to - phi_from);
    bool found = false;
    const double root = refine(phi_to, predicted, found);
    if (found) return root;
    if (depth >= opts.max_halvings)
      throw std::runtime_error("track_curve: curve lost at phi = " + std::to_string(phi_to) +
                               " after " + std::to_string(opts.max_halvings) +
                               " halvings; last good sample E = " + std::to_string(e_from));
    const double mid = 0.5 * (phi_from + phi_to);
    const double e_mid = advance(phi_from, e_from, slope, mid, depth + 1);
    const double mid_slope = (e_mid - e_from) / (mid - phi_from);
    return advance(mid, e_mid, mid_slope, phi_to, depth + 1);
  };

  EnergyCurve curve;
  curve.kappa1 = kappa1;
  curve.mu1 = mu1;
  curve.region = region;
  curve.samples.reserve(static_cast<std::size_t>(steps) + 1);

  auto accept = [&](double phi, double e) {
    check_margin(e);
    const double sres = std::abs(sec(phi, e));
    if (sres > 1e-9)
      throw std::runtime_error("track_curve: secular residual " + std::to_string(sres) +
                               " above 1e-9 at phi = " + std::to_string(phi));
    const BoundState bs = bound_state(Flux::real(phi), w_spec, e - kappa1, region, opts.tol,
                                      opts.trunc_guard);
    curve.samples.push_back({phi, e, sres, bs.residual, bs.fit.gamma});
  };

  // sample 0: refine the seed in place
  {
    bool found = false;
    const double e0 = refine(phi_a, e_seed, found);
    if (!found)
      throw std::runtime_error("track_curve: could not bracket the root at phi_a around the seed");
    accept(phi_a, e0);
  }

  const double dphi = (phi_b - phi_a) / steps;
  double slope = 0;
  for (int j = 1; j <= steps; ++j) {
    const double phi_prev = curve.samples.back().phi;
    const double e_prev = curve.samples.back().e;
    const double phi_next = phi_a + j * dphi;
    const double e_next = advance(phi_prev, e_prev, slope, phi_next, 0);
    accept(phi_next, e_next);
    slope = (e_next - e_prev) / (phi_next - phi_prev);
  }
  return curve;
}

// Curve merged with the two shifted band pictures: every sample whose E
// lies inside a hybrid-2 band at the nearest Farey rational gets flagged.
struct Fig5Report {
  EnergyCurve curve;
  std::vector<bool> embedded;
  std::vector<BandData> bands;  // unshifted butterfly; channels shift by kappa_i
  double kappa1 = 0, kappa2 = 0;
};

inline std::vector<bool> flag_embedded(const EnergyCurve& curve,
                                       const std::vector<BandData>& bands, double kappa2,
                                       double fatten = 0.0) {
  std::vector<double> alphas;
  alphas.reserve(bands.size());
  for (const BandData& bd : bands) alphas.push_back(bd.flux.alpha());
  std::vector<bool> flags;
  flags.reserve(curve.samples.size());
  for (const CurveSample& s : curve.samples) {
    const double alpha = s.phi / (2.0 * std::numbers::pi);
    std::size_t best = 0;
    for (std::size_t i = 1; i < alphas.size(); ++i)
      if (std::abs(alphas[i] - alpha) < std::abs(alphas[best] - alpha)) best = i;
    flags.push_back(band_union(bands[best], fatten).contains(s.e - kappa2));
  }
  return flags;
}

inline Fig5Report curve_to_fig5(const Mat2& k, const Mat2& m, const DefectSpec& spec,
                                double phi_a, double phi_b, int steps, double e_seed,
                                const RegionPtr& region, int qmax = 8, int kgrid = 24,
                                CurveOptions opts = {}) {
  const InterlayerPair pair = hybridize(k, m);
  if (std::abs(pair.mu1) < 1e-12) throw std::domain_error("curve_to_fig5 requires mu_1 != 0");
  Fig5Report rep;
  rep.curve = track_curve(spec, pair.kappa1, pair.mu1, phi_a, phi_b, steps, e_seed, region, opts);
  rep.bands = butterfly(qmax, kgrid, kgrid);
  rep.kappa1 = pair.kappa1;
  rep.kappa2 = pair.kappa2;
  rep.embedded = flag_embedded(rep.curve, rep.bands, rep.kappa2);
  return rep;
}

// CSV schema: `phi,E,secular_residual,state_residual,gamma,embedded_flag`.
inline void write_curve_csv(const EnergyCurve& curve, const std::vector<bool>* flags,
                            std::ostream& os) {
  os << "phi,E,secular_residual,state_residual,gamma,embedded_flag\n";
  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    const CurveSample& s = curve.samples[i];
    const int flag = flags && i < flags->size() && (*flags)[i] ? 1 : 0;
    os << fmt17(s.phi) << ',' << fmt17(s.e) << ',' << fmt17(s.secular_residual) << ','
       << fmt17(s.state_residual) << ',' << fmt17(s.gamma) << ',' << flag << '\n';
  }
}

}  // namespace magnon
