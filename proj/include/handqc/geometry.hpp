#pragma once

namespace handqc {

/// Axis-aligned box given by its corners, x1 <= x2 and y1 <= y2 (any unit).
struct CornerBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const noexcept { return x2 > x1 ? x2 - x1 : 0.0; }
  double height() const noexcept { return y2 > y1 ? y2 - y1 : 0.0; }
  double area() const noexcept { return width() * height(); }
};

/// Normalized centre-format box.
struct BBox {
  double cx = 0, cy = 0, w = 0, h = 0;

  /// 0 <= cx, cy <= 1 and 0 < w, h <= 1, all finite.
  bool is_valid() const noexcept;
  /// Corners clamped to the unit square.
  CornerBox corners() const noexcept;
  static BBox from_corners(const CornerBox& c) noexcept;

  bool operator==(const BBox&) const = default;
};

struct IouResult {
  double value = 0.0;
  /// Set when either operand has zero area; value is then 0.
  bool degenerate = false;
};

IouResult iou_checked(const CornerBox& a, const CornerBox& b) noexcept;

inline double iou(const CornerBox& a, const CornerBox& b) noexcept { return iou_checked(a, b).value; }
inline double iou(const BBox& a, const BBox& b) noexcept { return iou(a.corners(), b.corners()); }

}  // namespace handqc
