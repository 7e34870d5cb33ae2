// Copyright 2026 The chainclock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "chainclock/errors.hpp"
#include "chainclock/study.hpp"

namespace chainclock {

namespace {

constexpr double kWidth = 760, kHeight = 500;
constexpr double kLeft = 84, kTop = 44, kBottom = 64;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;
  double pixel_lo = 0, pixel_hi = 1;

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return pixel_lo + (x - a) / (b - a) * (pixel_hi - pixel_lo);
  }

  bool accepts(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = std::floor(std::log10(lo)); d <= std::ceil(std::log10(hi)); d += 1.0) {
        const double v = std::pow(10.0, d);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
      }
      return out;
    }
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
      out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
  }
};

Axis fit_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* values : data) {
    for (double v : *values) {
      if (!std::isfinite(v) || (log && v <= 0.0)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    lo = log ? 0.1 : 0.0;
    hi = 1.0;
  }
  if (log) {
    lo = std::pow(10.0, std::floor(std::log10(lo)));
    hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (hi <= lo) hi = lo * 10.0;
  } else {
    if (hi <= lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    lo = lo >= 0.0 && lo - pad < 0.0 ? 0.0 : lo - pad;
    hi += pad;
  }
  return {lo, hi, log};
}

void polyline(std::ostringstream& svg, const PlotSeries& s, const Axis& x, const Axis& y) {
  std::string points;
  for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
    if (!x.accepts(s.x[i]) || !y.accepts(s.y[i])) continue;
    const std::string p = num(x.map(s.x[i])) + "," + num(y.map(s.y[i]));
    if (s.markers) {
      svg << "<circle cx=\"" << num(x.map(s.x[i])) << "\" cy=\"" << num(y.map(s.y[i]))
          << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
    }
    points += p + " ";
  }
  if (!s.markers && !points.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\""
        << points << "\"/>\n";
  }
}

}  // namespace

std::string render_svg(const PlotSpec& plot) {
  const bool dual = std::any_of(plot.series.begin(), plot.series.end(),
                                [](const PlotSeries& s) { return s.right_axis; });
  const double right = dual ? 84 : 30;
  std::vector<const std::vector<double>*> xs, ys, y2s;
  for (const auto& s : plot.series) {
    xs.push_back(&s.x);
    (s.right_axis ? y2s : ys).push_back(&s.y);
  }
  std::vector<double> markers = plot.vertical_markers;
  xs.push_back(&markers);
  Axis x = fit_axis(xs, plot.log_x);
  Axis y = fit_axis(ys, plot.log_y);
  Axis y2 = fit_axis(y2s, false);
  x.pixel_lo = kLeft;
  x.pixel_hi = kWidth - right;
  y.pixel_lo = y2.pixel_lo = kHeight - kBottom;
  y.pixel_hi = y2.pixel_hi = kTop;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(plot.title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << x.pixel_hi - kLeft
      << "\" height=\"" << y.pixel_lo - kTop << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : x.ticks()) {
    const double px = x.map(t);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(y.pixel_lo) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(y.pixel_lo + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(px) << "\" y=\"" << num(y.pixel_lo + 19)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : y.ticks()) {
    const double py = y.map(t);
    svg << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << kLeft
        << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  if (dual) {
    for (double t : y2.ticks()) {
      const double py = y2.map(t);
      svg << "<line x1=\"" << num(x.pixel_hi) << "\" y1=\"" << num(py) << "\" x2=\""
          << num(x.pixel_hi + 5) << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << num(x.pixel_hi + 8) << "\" y=\"" << num(py + 4) << "\">"
          << tick_label(t) << "</text>\n";
    }
    svg << "<text transform=\"translate(" << num(kWidth - 14) << "," << num(kHeight / 2)
        << ") rotate(90)\" text-anchor=\"middle\">" << escape(plot.y2_label) << "</text>\n";
  }
  svg << "<text x=\"" << num((kLeft + x.pixel_hi) / 2) << "\" y=\"" << num(kHeight - 18)
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n"
      << "<text transform=\"translate(18," << num(kHeight / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  for (double m : plot.vertical_markers) {
    if (!x.accepts(m)) continue;
    svg << "<line x1=\"" << num(x.map(m)) << "\" y1=\"" << kTop << "\" x2=\"" << num(x.map(m))
        << "\" y2=\"" << num(y.pixel_lo) << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
  }
  for (const auto& s : plot.series) polyline(svg, s, x, s.right_axis ? y2 : y);

  double legend_y = kTop + 18;
  for (const auto& s : plot.series) {
    if (s.label.empty()) continue;
    svg << "<rect x=\"" << kLeft + 12 << "\" y=\"" << num(legend_y - 9)
        << "\" width=\"14\" height=\"4\" fill=\"" << s.color << "\"/>\n"
        << "<text x=\"" << kLeft + 32 << "\" y=\"" << num(legend_y - 3) << "\">"
        << escape(s.label) << "</text>\n";
    legend_y += 16;
  }

  if (plot.inset) {
    const double w = 200, h = 120;
    const double x0 = x.pixel_hi - w - 12, y0 = kTop + 12;
    Axis ix = fit_axis({&plot.inset->x}, false);
    Axis iy = fit_axis({&plot.inset->y}, false);
    ix.pixel_lo = x0 + 6;
    ix.pixel_hi = x0 + w - 6;
    iy.pixel_lo = y0 + h - 18;
    iy.pixel_hi = y0 + 6;
    svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << w
        << "\" height=\"" << h << "\" fill=\"white\" stroke=\"gray\"/>\n";
    polyline(svg, *plot.inset, ix, iy);
    svg << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(y0 + h - 4)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(plot.inset->label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

PlotSpec analysis_plot(const AnalysisReport& r) {
  PlotSpec p;
  p.title = "Survival and tick PDF, N = " + std::to_string(r.spec.n_sites());
  p.x_label = "t (1/gamma)";
  p.y_label = "S(t)";
  p.y2_label = "p_tick(t)";
  p.series.push_back({"S(t)", r.survival.times, r.survival.values, "#d62728"});
  p.series.push_back({"p_tick(t)", r.tick_pdf.times, r.tick_pdf.values, "#1f77b4", false, true});
  PlotSeries inset{"J_i vs i", {}, r.spec.couplings(), "#2ca02c", true};
  for (std::size_t i = 1; i <= r.spec.couplings().size(); ++i) inset.x.push_back(double(i));
  p.inset = inset;
  if (r.statistics) p.vertical_markers.push_back(r.statistics->mu);
  return p;
}

PlotSpec sweep_plot(const SweepOutcome& o) {
  PlotSpec p;
  p.title = "Precision vs resolution of optimized clocks";
  p.x_label = "resolution nu";
  p.y_label = "precision";
  p.log_x = p.log_y = true;
  PlotSeries pts{"optimized", {}, {}, "#1f77b4", true};
  PlotSeries lower{"gamma / nu", {}, {}, "#7f7f7f"};
  PlotSeries upper{"gamma^2 / nu^2", {}, {}, "#000000"};
  for (const auto& r : o.best) {
    pts.x.push_back(r.nu);
    pts.y.push_back(r.precision);
    lower.x.push_back(r.nu);
    lower.y.push_back(r.prt_lower);
    upper.x.push_back(r.nu);
    upper.y.push_back(r.prt_upper);
  }
  p.series = {pts, lower, upper};
  if (o.precision_vs_resolution) {
    const auto& f = *o.precision_vs_resolution;
    PlotSeries line{"fit b = " + tick_label(f.exponent), {}, {}, "#d62728"};
    for (const auto& q : f.points_used) {
      line.x.push_back(q.x);
      line.y.push_back(f.prefactor * std::pow(q.x, f.exponent));
    }
    p.series.push_back(line);
  }
  return p;
}

PlotSpec coupling_scaling_plot(const SweepOutcome& o) {
  PlotSpec p;
  p.title = "Coupling scalings of optimized clocks";
  p.x_label = "N";
  p.y_label = "value";
  p.log_x = p.log_y = true;
  PlotSeries j0{"J0", {}, {}, "#1f77b4", true};
  PlotSeries ratio{"J_{N-1} / J_max", {}, {}, "#ff7f0e", true};
  for (const auto& r : o.best) {
    j0.x.push_back(double(r.n_sites));
    j0.y.push_back(r.j0());
    ratio.x.push_back(double(r.n_sites));
    ratio.y.push_back(r.j_last / r.j_max);
  }
  p.series = {j0, ratio};
  return p;
}

PlotSpec quench_plot(const std::vector<QuenchSweep>& sweeps) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
  PlotSpec p;
  p.title = "Effective precision vs decoupling time";
  p.x_label = "T_DC (1/gamma)";
  p.y_label = "N_eff / N";
  p.log_x = true;
  for (std::size_t k = 0; k < sweeps.size(); ++k) {
    const auto& s = sweeps[k];
    PlotSeries line{"N = " + std::to_string(s.n_sites), {}, {}, colors[k % 5]};
    for (const auto& q : s.points) {
      if (!q.n_eff) continue;
      line.x.push_back(q.t_dc);
      line.y.push_back(*q.n_eff / s.baseline);
    }
    p.series.push_back(line);
    if (s.plateau_onset) p.vertical_markers.push_back(*s.plateau_onset);
  }
  return p;
}

std::string plot_from_report(const io::Json& report) {
  if (!report.is_object() || !report.contains("kind")) {
    throw ConfigError("plot: input is not a chainclock report");
  }
  const auto kind = report.at("kind").get<std::string>();
  auto vec = [](const io::Json& j) { return j.get<std::vector<double>>(); };
  PlotSpec p;
  if (kind == "analysis") {
    p.title = "Survival and tick PDF, N = " + std::to_string(report.at("n_sites").get<int>());
    p.x_label = "t (1/gamma)";
    p.y_label = "S(t)";
    p.y2_label = "p_tick(t)";
    p.series.push_back({"S(t)", vec(report.at("survival").at("t")),
                        vec(report.at("survival").at("value")), "#d62728"});
    p.series.push_back({"p_tick(t)", vec(report.at("tick_pdf").at("t")),
                        vec(report.at("tick_pdf").at("value")), "#1f77b4", false, true});
    PlotSeries inset{"J_i vs i", {}, vec(report.at("couplings")), "#2ca02c", true};
    for (std::size_t i = 1; i <= inset.y.size(); ++i) inset.x.push_back(double(i));
    p.inset = inset;
    const auto& st = report.at("statistics");
    if (!st.is_null()) p.vertical_markers.push_back(st.at("mu").get<double>());
  } else if (kind == "sweep") {
    SweepOutcome o;
    for (const auto& b : report.at("best")) {
      SweepRecord r;
      r.n_sites = b.at("n_sites").get<std::size_t>();
      r.nu = b.at("nu").get<double>();
      r.precision = b.at("precision").get<double>();
      r.prt_lower = b.at("prt_lower").get<double>();
      r.prt_upper = b.at("prt_upper").get<double>();
      r.params = vec(b.at("params"));
      r.j_last = b.at("j_last").get<double>();
      r.j_max = b.at("j_max").get<double>();
      o.best.push_back(r);
    }
    p = sweep_plot(o);
  } else if (kind == "quench") {
    std::vector<QuenchSweep> sweeps;
    for (const auto& s : report.at("sweeps")) {
      QuenchSweep q;
      q.n_sites = s.at("n_sites").get<std::size_t>();
      q.baseline = s.at("baseline").get<double>();
      if (!s.at("plateau_onset").is_null()) q.plateau_onset = s.at("plateau_onset").get<double>();
      for (const auto& pt : s.at("points")) {
        QuenchPoint point;
        point.t_dc = pt.at("t_dc").get<double>();
        if (!pt.at("n_eff").is_null()) point.n_eff = pt.at("n_eff").get<double>();
        q.points.push_back(point);
      }
      sweeps.push_back(q);
    }
    p = quench_plot(sweeps);
  } else {
    throw ConfigError("plot: unknown report kind '" + kind + "'");
  }
  return render_svg(p);
}

}  // namespace chainclock
