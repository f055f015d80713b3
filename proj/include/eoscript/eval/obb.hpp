#pragma once

// Oriented boxes: rotated IoU by convex polygon clipping and mAP at IoU 0.5.

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace eoscript::eval {

struct ObbDetection {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double angle = 0.0;  // radians, counter-clockwise, in (-pi/2, pi/2]
  int class_id = 0;
  double score = 1.0;
};

struct Point {
  double x;
  double y;
};

// Corners in counter-clockwise order.
std::array<Point, 4> obb_corners(const ObbDetection& box);

double polygon_area(const std::vector<Point>& polygon);

// Intersection of two convex counter-clockwise polygons.
std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip);

// Throws EvalError(DegenerateBox) when either box has zero area.
double obb_iou(const ObbDetection& a, const ObbDetection& b);

struct MapResult {
  std::map<int, double> per_class_ap;  // classes with at least one truth
  std::optional<double> map;           // absent when there are no truths at all
};

MapResult map50(const std::vector<ObbDetection>& preds, const std::vector<ObbDetection>& truths,
                double iou_threshold = 0.5);

}  // namespace eoscript::eval
