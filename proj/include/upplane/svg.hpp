#pragma once

#include <string>
#include <vector>

#include "upplane/bounds.hpp"

namespace upplane::svg {

struct PlanePoint {
  double p = 0.0;
  double u = 0.0;
  std::string label;
  std::string color = "#1f6fb2";
};

struct PlaneOptions {
  std::string title = "uncertainty-perception plane";
  std::string x_label = "perception index P";
  std::string y_label = "uncertainty N (entropy power)";
  int width = 760;
  int height = 520;
  bool timestamp = true;
  bool shade_regions = true;  // requires a non-empty curve
};

// Renders the plane: shaded impossible/optimal/suboptimal regions bounded by
// the eta curves, plus labeled estimator points. Pure string assembly, no
// plotting dependency.
std::string render_up_plane(const std::vector<bounds::CurveRow>& curve,
                            const std::vector<PlanePoint>& points,
                            const PlaneOptions& opts);

}  // namespace upplane::svg
