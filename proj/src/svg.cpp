#include "upplane/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace upplane::svg {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;  // data ranges
  int left = 70, right = 20, top = 40, bottom = 50;
  int width = 760, height = 520;

  double sx(double x) const {
    return left + (x - x0) / (x1 - x0) * (width - left - right);
  }
  double sy(double y) const {
    return height - bottom -
           (y - y0) / (y1 - y0) * (height - top - bottom);
  }
};

std::string polyline(const Frame& f,
                     const std::vector<std::pair<double, double>>& pts,
                     const std::string& style) {
  std::ostringstream out;
  out << "  <polyline fill=\"none\" " << style << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out << ' ';
    out << fmt(f.sx(pts[i].first)) << ',' << fmt(f.sy(pts[i].second));
  }
  out << "\"/>\n";
  return out.str();
}

// Region bounded above by top_y(row) and below by bottom_y(row); walks the
// top edge left to right, then the bottom edge back.
template <class TopY, class BottomY>
std::string region_polygon(const Frame& f,
                           const std::vector<bounds::CurveRow>& curve,
                           TopY top_y, BottomY bottom_y,
                           const std::string& fill) {
  std::ostringstream out;
  out << "  <polygon fill=\"" << fill << "\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double y = std::clamp(top_y(curve[i]), f.y0, f.y1);
    out << fmt(f.sx(curve[i].p)) << ',' << fmt(f.sy(y)) << ' ';
  }
  for (std::size_t i = curve.size(); i-- > 0;) {
    const double y = std::clamp(bottom_y(curve[i]), f.y0, f.y1);
    out << fmt(f.sx(curve[i].p)) << ',' << fmt(f.sy(y));
    if (i) out << ' ';
  }
  out << "\"/>\n";
  return out.str();
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span;
       t += step)
    ticks.push_back(t);
  return ticks;
}

}  // namespace

std::string render_up_plane(const std::vector<bounds::CurveRow>& curve,
                            const std::vector<PlanePoint>& points,
                            const PlaneOptions& opts) {
  Frame f;
  f.width = opts.width;
  f.height = opts.height;

  double xmax = 1e-9, ymax = 1e-9;
  for (const auto& row : curve) {
    xmax = std::max(xmax, row.p);
    ymax = std::max(ymax, row.upper);
  }
  for (const auto& pt : points) {
    xmax = std::max(xmax, pt.p);
    ymax = std::max(ymax, pt.u);
  }
  f.x0 = 0.0;
  f.x1 = xmax * 1.05;
  f.y0 = 0.0;
  f.y1 = ymax * 1.15;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
      << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
      << ' ' << opts.height << "\">\n";
  if (opts.timestamp) {
    char stamp[64];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out << "  <!-- generated " << stamp << " -->\n";
  }
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (opts.shade_regions && !curve.empty()) {
    const double top = f.y1;
    out << region_polygon(
        f, curve, [](const bounds::CurveRow& r) { return r.lower; },
        [](const bounds::CurveRow&) { return 0.0; }, "#f6d3d3");
    out << region_polygon(
        f, curve, [](const bounds::CurveRow& r) { return r.upper; },
        [](const bounds::CurveRow& r) { return r.lower; }, "#d9edd9");
    out << region_polygon(
        f, curve, [top](const bounds::CurveRow&) { return top; },
        [](const bounds::CurveRow& r) { return r.upper; }, "#ececec");
  }

  // Axes.
  out << "  <line x1=\"" << f.left << "\" y1=\"" << opts.height - f.bottom
      << "\" x2=\"" << opts.width - f.right << "\" y2=\""
      << opts.height - f.bottom << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\""
      << f.left << "\" y2=\"" << opts.height - f.bottom
      << "\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(f.x0, f.x1)) {
    out << "  <line x1=\"" << fmt(f.sx(t)) << "\" y1=\""
        << opts.height - f.bottom << "\" x2=\"" << fmt(f.sx(t)) << "\" y2=\""
        << opts.height - f.bottom + 5 << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << fmt(f.sx(t)) << "\" y=\""
        << opts.height - f.bottom + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(t)
        << "</text>\n";
  }
  for (double t : nice_ticks(f.y0, f.y1)) {
    out << "  <line x1=\"" << f.left - 5 << "\" y1=\"" << fmt(f.sy(t))
        << "\" x2=\"" << f.left << "\" y2=\"" << fmt(f.sy(t))
        << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << f.left - 8 << "\" y=\"" << fmt(f.sy(t) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(t)
        << "</text>\n";
  }
  out << "  <text x=\"" << (f.left + opts.width - f.right) / 2 << "\" y=\""
      << opts.height - 12 << "\" font-size=\"13\" text-anchor=\"middle\">"
      << opts.x_label << "</text>\n";
  out << "  <text x=\"18\" y=\"" << (f.top + opts.height - f.bottom) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << 18 << ' ' << (f.top + opts.height - f.bottom) / 2 << ")\">"
      << opts.y_label << "</text>\n";
  out << "  <text x=\"" << opts.width / 2
      << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << opts.title
      << "</text>\n";

  if (!curve.empty()) {
    std::vector<std::pair<double, double>> lower_pts, upper_pts;
    for (const auto& row : curve) {
      lower_pts.emplace_back(row.p, row.lower);
      upper_pts.emplace_back(row.p, row.upper);
    }
    out << polyline(f, lower_pts,
                    "stroke=\"#b02a2a\" stroke-width=\"1.6\"");
    out << polyline(f, upper_pts,
                    "stroke=\"#2a7a2a\" stroke-width=\"1.6\"");
    if (opts.shade_regions) {
      out << "  <text x=\"" << fmt(f.sx(f.x1 * 0.62)) << "\" y=\""
          << fmt(f.sy(f.y1 * 0.06))
          << "\" font-size=\"12\" fill=\"#8a1f1f\">impossible</text>\n";
      out << "  <text x=\"" << fmt(f.sx(f.x1 * 0.04)) << "\" y=\""
          << fmt(f.sy(f.y1 * 0.92))
          << "\" font-size=\"12\" fill=\"#555555\">suboptimal</text>\n";
      const double mid_p = curve[curve.size() / 3].p;
      const double mid_u = 0.5 * (curve[curve.size() / 3].lower +
                                  curve[curve.size() / 3].upper);
      out << "  <text x=\"" << fmt(f.sx(mid_p)) << "\" y=\""
          << fmt(f.sy(mid_u))
          << "\" font-size=\"12\" fill=\"#205a20\">optimal</text>\n";
    }
  }

  for (const auto& pt : points) {
    out << "  <circle cx=\"" << fmt(f.sx(pt.p)) << "\" cy=\""
        << fmt(f.sy(pt.u)) << "\" r=\"4\" fill=\"" << pt.color << "\"/>\n";
    if (!pt.label.empty())
      out << "  <text x=\"" << fmt(f.sx(pt.p) + 7) << "\" y=\""
          << fmt(f.sy(pt.u) - 6) << "\" font-size=\"11\">" << pt.label
          << "</text>\n";
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace upplane::svg
