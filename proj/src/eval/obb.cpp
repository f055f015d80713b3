#include "eoscript/eval/obb.hpp"

#include <algorithm>
#include <cmath>

#include "eoscript/eval/metrics.hpp"

namespace eoscript::eval {

std::array<Point, 4> obb_corners(const ObbDetection& b) {
  const double c = std::cos(b.angle);
  const double s = std::sin(b.angle);
  const double hw = b.w / 2.0;
  const double hh = b.h / 2.0;
  const std::array<Point, 4> local{Point{-hw, -hh}, Point{hw, -hh}, Point{hw, hh}, Point{-hw, hh}};
  std::array<Point, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {b.cx + c * local[i].x - s * local[i].y, b.cy + s * local[i].x + c * local[i].y};
  }
  return out;
}

double polygon_area(const std::vector<Point>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return std::abs(twice) / 2.0;
}

namespace {

double cross(const Point& a, const Point& b, const Point& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

Point intersect(const Point& p, const Point& q, const Point& a, const Point& b) {
  const double d1 = cross(a, b, p);
  const double d2 = cross(a, b, q);
  const double t = d1 / (d1 - d2);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

}  // namespace

std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip) {
  std::vector<Point> out = subject;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Point& a = clip[i];
    const Point& b = clip[(i + 1) % clip.size()];
    std::vector<Point> in;
    in.swap(out);
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Point& p = in[j];
      const Point& q = in[(j + 1) % in.size()];
      const bool p_in = cross(a, b, p) >= 0.0;
      const bool q_in = cross(a, b, q) >= 0.0;
      if (p_in) out.push_back(p);
      if (p_in != q_in) out.push_back(intersect(p, q, a, b));
    }
  }
  return out;
}

double obb_iou(const ObbDetection& a, const ObbDetection& b) {
  const double area_a = a.w * a.h;
  const double area_b = b.w * b.h;
  if (!(a.w > 0.0 && a.h > 0.0 && b.w > 0.0 && b.h > 0.0)) {
    throw EvalError(EvalErrc::DegenerateBox, "oriented box with zero area");
  }
  const auto ca = obb_corners(a);
  const auto cb = obb_corners(b);
  const auto inter_poly = clip_convex({ca.begin(), ca.end()}, {cb.begin(), cb.end()});
  const double inter = inter_poly.size() < 3 ? 0.0 : polygon_area(inter_poly);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

MapResult map50(const std::vector<ObbDetection>& preds, const std::vector<ObbDetection>& truths,
                double iou_threshold) {
  std::map<int, std::vector<const ObbDetection*>> truth_by_class;
  for (const auto& t : truths) truth_by_class[t.class_id].push_back(&t);
  std::map<int, std::vector<const ObbDetection*>> pred_by_class;
  for (const auto& p : preds) pred_by_class[p.class_id].push_back(&p);

  MapResult out;
  for (const auto& [cls, gts] : truth_by_class) {
    auto ps = pred_by_class[cls];
    std::stable_sort(ps.begin(), ps.end(), [](const auto* x, const auto* y) { return x->score > y->score; });
    std::vector<bool> used(gts.size(), false);
    std::vector<double> recall;
    std::vector<double> precision;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      double best = -1.0;
      std::size_t best_j = gts.size();
      for (std::size_t j = 0; j < gts.size(); ++j) {
        if (used[j]) continue;
        const double iou = obb_iou(*ps[i], *gts[j]);
        if (iou >= iou_threshold && iou > best) {
          best = iou;
          best_j = j;
        }
      }
      if (best_j < gts.size()) {
        used[best_j] = true;
        ++tp;
      }
      recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
      precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    }
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0;
    double prev_r = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
      ap += (recall[i] - prev_r) * precision[i];
      prev_r = recall[i];
    }
    out.per_class_ap[cls] = ap;
  }
  if (!out.per_class_ap.empty()) {
    double sum = 0.0;
    for (const auto& [cls, ap] : out.per_class_ap) sum += ap;
    out.map = sum / static_cast<double>(out.per_class_ap.size());
  }
  return out;
}

}  // namespace eoscript::eval
