#pragma once

#include <array>
#include <cstdint>

namespace lffn {

// Axis-aligned rectangle in image pixel coordinates, x2 > x1 and y2 > y1.
struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const { return x2 > x1 && y2 > y1; }

  bool operator==(const Box&) const = default;
};

double intersection_area(const Box& a, const Box& b);
// intersection over union, in [0, 1]
double iou(const Box& a, const Box& b);

// (dx/wa, dy/ha, log(wg/wa), log(hg/ha))
std::array<double, 4> encode_box(const Box& anchor, const Box& gt);
Box decode_box(const Box& anchor, const std::array<double, 4>& deltas);

Box clip_box(const Box& b, double image_w, double image_h);

}  // namespace lffn
