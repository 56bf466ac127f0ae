#include "lffn/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lffn/errors.hpp"

namespace lffn {

double intersection_area(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ih <= 0.0) return 0.0;
  return iw * ih;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

std::array<double, 4> encode_box(const Box& anchor, const Box& gt) {
  if (gt.width() <= 0.0 || gt.height() <= 0.0)
    throw DomainError("encode_box: ground-truth box has non-positive dims (" +
                      std::to_string(gt.width()) + " x " + std::to_string(gt.height()) + ")");
  if (anchor.width() <= 0.0 || anchor.height() <= 0.0)
    throw DomainError("encode_box: anchor has non-positive dims");
  return {(gt.center_x() - anchor.center_x()) / anchor.width(),
          (gt.center_y() - anchor.center_y()) / anchor.height(),
          std::log(gt.width() / anchor.width()), std::log(gt.height() / anchor.height())};
}

Box decode_box(const Box& anchor, const std::array<double, 4>& deltas) {
  const double cx = anchor.center_x() + deltas[0] * anchor.width();
  const double cy = anchor.center_y() + deltas[1] * anchor.height();
  const double w = anchor.width() * std::exp(deltas[2]);
  const double h = anchor.height() * std::exp(deltas[3]);
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

Box clip_box(const Box& b, double image_w, double image_h) {
  Box out;
  out.x1 = std::clamp(b.x1, 0.0, image_w);
  out.y1 = std::clamp(b.y1, 0.0, image_h);
  out.x2 = std::clamp(b.x2, 0.0, image_w);
  out.y2 = std::clamp(b.y2, 0.0, image_h);
  return out;
}

}  // namespace lffn
