#pragma once

// Deterministic SVG rendering: band intervals as 1px vertical segments at
// each flux abscissa, curves as polylines.  Fixed 1200x900 viewport, fixed
// element order and float formatting, so identical input yields identical
// bytes (golden-file friendly).

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "magnon/curve.hpp"
#include "magnon/io.hpp"
#include "magnon/spectral.hpp"

namespace magnon {

struct SvgStyle {
  int width = 1200;
  int height = 900;
  int margin_left = 70, margin_right = 25, margin_top = 25, margin_bottom = 55;
  std::string band_color = "#1b1b1b";
  std::string band1_color = "#c0392b";  // hybrid-1 butterfly (lower copy)
  std::string band2_color = "#2e6da4";  // hybrid-2 butterfly (upper copy)
  std::string curve_color = "#c0392b";
};

namespace detail {

struct Frame {
  double x0, y0, w, h;      // plot area in pixels
  double amin, amax;        // alpha range
  double emin, emax;        // energy range
  double x(double a) const { return x0 + (a - amin) / (amax - amin) * w; }
  double y(double e) const { return y0 + (emax - e) / (emax - emin) * h; }
};

inline std::string svg_open(const SvgStyle& st) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(st.width) +
       "\" height=\"" + std::to_string(st.height) + "\" viewBox=\"0 0 " +
       std::to_string(st.width) + " " + std::to_string(st.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(st.width) + "\" height=\"" +
       std::to_string(st.height) + "\" fill=\"white\"/>\n";
  return s;
}

inline std::string axes(const Frame& fr, const SvgStyle&) {
  std::string s = "<g id=\"axes\" stroke=\"#444444\" fill=\"none\">\n";
  s += "<rect x=\"" + fmt_fixed(fr.x0, 2) + "\" y=\"" + fmt_fixed(fr.y0, 2) + "\" width=\"" +
       fmt_fixed(fr.w, 2) + "\" height=\"" + fmt_fixed(fr.h, 2) + "\"/>\n";
  s += "</g>\n";
  s += "<g id=\"labels\" font-family=\"monospace\" font-size=\"14\" fill=\"#222222\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double a = fr.amin + (fr.amax - fr.amin) * t / 4.0;
    s += "<text x=\"" + fmt_fixed(fr.x(a) - 14, 2) + "\" y=\"" +
         fmt_fixed(fr.y0 + fr.h + 22, 2) + "\">" + fmt_fixed(a, 2) + "</text>\n";
  }
  for (int t = 0; t <= 6; ++t) {
    const double e = fr.emin + (fr.emax - fr.emin) * t / 6.0;
    s += "<text x=\"" + fmt_fixed(fr.x0 - 58, 2) + "\" y=\"" + fmt_fixed(fr.y(e) + 5, 2) +
         "\">" + fmt_fixed(e, 2) + "</text>\n";
  }
  s += "<text x=\"" + fmt_fixed(fr.x0 + fr.w / 2 - 30, 2) + "\" y=\"" +
       fmt_fixed(fr.y0 + fr.h + 44, 2) + "\">phi/2pi</text>\n";
  s += "<text x=\"" + fmt_fixed(fr.x0 - 58, 2) + "\" y=\"" + fmt_fixed(fr.y0 - 8, 2) +
       "\">E</text>\n";
  s += "</g>\n";
  return s;
}

inline std::string band_layer(const std::vector<BandData>& data, const Frame& fr, double shift,
                              const std::string& id, const std::string& color) {
  std::string s = "<g id=\"" + id + "\" stroke=\"" + color + "\" stroke-width=\"1\">\n";
  for (const BandData& bd : data) {
    const double x = fr.x(bd.flux.alpha());
    for (const auto& band : bd.bands)
      s += "<line x1=\"" + fmt_fixed(x, 2) + "\" y1=\"" + fmt_fixed(fr.y(band.emin + shift), 2) +
           "\" x2=\"" + fmt_fixed(x, 2) + "\" y2=\"" + fmt_fixed(fr.y(band.emax + shift), 2) +
           "\"/>\n";
  }
  s += "</g>\n";
  return s;
}

}  // namespace detail

// Single band picture (the Hofstadter butterfly): one 1px vertical segment
// per band interval at each flux abscissa.
inline std::string render_band_svg(const std::vector<BandData>& data, SvgStyle style = {}) {
  if (data.empty()) throw std::invalid_argument("render_band_svg: empty data");
  detail::Frame fr;
  fr.x0 = style.margin_left;
  fr.y0 = style.margin_top;
  fr.w = style.width - style.margin_left - style.margin_right;
  fr.h = style.height - style.margin_top - style.margin_bottom;
  fr.amin = data.front().flux.alpha();
  fr.amax = data.back().flux.alpha();
  if (fr.amax == fr.amin) {
    fr.amin -= 0.5;
    fr.amax += 0.5;
  }
  fr.emin = -3.0;
  fr.emax = 3.0;
  std::string s = detail::svg_open(style);
  s += detail::axes(fr, style);
  s += detail::band_layer(data, fr, 0.0, "bands", style.band_color);
  s += "</svg>\n";
  return s;
}

// Fig.-5 style layout: the two shifted copies of the band picture plus the
// defect-energy curve overlaid.
inline std::string render_fig5_svg(const Fig5Report& rep, SvgStyle style = {}) {
  if (rep.bands.empty() || rep.curve.samples.empty())
    throw std::invalid_argument("render_fig5_svg: empty data");
  detail::Frame fr;
  fr.x0 = style.margin_left;
  fr.y0 = style.margin_top;
  fr.w = style.width - style.margin_left - style.margin_right;
  fr.h = style.height - style.margin_top - style.margin_bottom;
  fr.amin = rep.bands.front().flux.alpha();
  fr.amax = rep.bands.back().flux.alpha();
  double emin = -3.0 + std::min(rep.kappa1, rep.kappa2);
  double emax = 3.0 + std::max(rep.kappa1, rep.kappa2);
  for (const CurveSample& s : rep.curve.samples) {
    emin = std::min(emin, s.e);
    emax = std::max(emax, s.e);
  }
  const double pad = 0.05 * (emax - emin);
  fr.emin = emin - pad;
  fr.emax = emax + pad;

  std::string s = detail::svg_open(style);
  s += detail::axes(fr, style);
  s += detail::band_layer(rep.bands, fr, rep.kappa1, "hybrid1", style.band1_color);
  s += detail::band_layer(rep.bands, fr, rep.kappa2, "hybrid2", style.band2_color);
  s += "<g id=\"curve\" stroke=\"" + style.curve_color + "\" stroke-width=\"2\" fill=\"none\">\n";
  s += "<polyline points=\"";
  for (std::size_t i = 0; i < rep.curve.samples.size(); ++i) {
    const CurveSample& cs = rep.curve.samples[i];
    if (i) s += ' ';
    s += fmt_fixed(fr.x(cs.phi / (2.0 * std::numbers::pi)), 2) + "," + fmt_fixed(fr.y(cs.e), 2);
  }
  s += "\"/>\n</g>\n</svg>\n";
  return s;
}

}  // namespace magnon
