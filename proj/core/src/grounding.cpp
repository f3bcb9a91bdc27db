#include "actkit/grounding.hpp"

#include <algorithm>
#include <cmath>

#include "actkit/errors.hpp"

namespace actkit {

namespace {

constexpr std::string_view kRefStart = "<|object_ref_start|>";
constexpr std::string_view kRefEnd = "<|object_ref_end|>";
constexpr std::string_view kBoxStart = "<|bbox_start|>";
constexpr std::string_view kBoxEnd = "<|bbox_end|>";
constexpr std::string_view kPointStart = "<|point_start|>";
constexpr std::string_view kPointEnd = "<|point_end|>";

struct Cursor {
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
            text[pos] == '\r'))
      ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  bool try_consume(std::string_view token) {
    skip_ws();
    if (text.compare(pos, token.size(), token) != 0) return false;
    pos += token.size();
    return true;
  }
  void expect(std::string_view token) {
    if (!try_consume(token))
      throw DataError("expected \"" + std::string(token) + "\" at byte offset " +
                          std::to_string(pos),
                      -1, static_cast<long long>(pos));
  }
};

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\n\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\n\r");
  return std::string(s.substr(b, e - b + 1));
}

int parse_coord(Cursor& cur) {
  cur.skip_ws();
  size_t start = cur.pos;
  while (cur.pos < cur.text.size() && cur.text[cur.pos] >= '0' &&
         cur.text[cur.pos] <= '9')
    ++cur.pos;
  if (cur.pos == start)
    throw DataError("expected integer coordinate at byte offset " +
                        std::to_string(start),
                    -1, static_cast<long long>(start));
  if (cur.pos - start > 4)
    throw DataError("coordinate too long at byte offset " + std::to_string(start),
                    -1, static_cast<long long>(start));
  int value = 0;
  for (size_t i = start; i < cur.pos; ++i) value = value * 10 + (cur.text[i] - '0');
  if (value >= kNormalizedRange)
    throw DataError("coordinate " + std::to_string(value) +
                        " outside [0, 1000) at byte offset " +
                        std::to_string(start),
                    -1, static_cast<long long>(start));
  return value;
}

Point parse_pair(Cursor& cur) {
  cur.expect("(");
  int x = parse_coord(cur);
  cur.expect(",");
  int y = parse_coord(cur);
  cur.expect(")");
  return {static_cast<double>(x), static_cast<double>(y)};
}

void emit_pair(std::string& out, const Point& p) {
  out += '(';
  out += std::to_string(static_cast<int>(p.x));
  out += ',';
  out += std::to_string(static_cast<int>(p.y));
  out += ')';
}

}  // namespace

std::vector<Annotation> parse_grounding(std::string_view text) {
  Cursor cur{text};
  std::vector<Annotation> out;
  while (!cur.at_end()) {
    cur.expect(kRefStart);
    size_t name_start = cur.pos;
    size_t name_end = text.find(kRefEnd, cur.pos);
    if (name_end == std::string_view::npos)
      throw DataError("unterminated object reference at byte offset " +
                          std::to_string(name_start),
                      -1, static_cast<long long>(name_start));
    Annotation ann;
    ann.name = trim(text.substr(name_start, name_end - name_start));
    cur.pos = name_end + kRefEnd.size();
    ann.space = NormalizedSpace{};

    if (cur.try_consume(kBoxStart)) {
      Point c1 = parse_pair(cur);
      cur.expect(",");
      Point c2 = parse_pair(cur);
      cur.expect(kBoxEnd);
      if (c1.x > c2.x || c1.y > c2.y)
        throw DataError("bbox corners out of order at byte offset " +
                            std::to_string(cur.pos),
                        -1, static_cast<long long>(cur.pos));
      ann.geometry = BBox{c1.x, c1.y, c2.x, c2.y};
    } else if (cur.try_consume(kPointStart)) {
      std::vector<Point> points;
      points.push_back(parse_pair(cur));
      while (cur.try_consume(",")) points.push_back(parse_pair(cur));
      cur.expect(kPointEnd);
      ann.geometry = std::move(points);
    } else {
      throw DataError("expected bbox or point block at byte offset " +
                          std::to_string(cur.pos),
                      -1, static_cast<long long>(cur.pos));
    }
    validate_annotation(ann);
    out.push_back(std::move(ann));
  }
  if (out.empty()) throw DataError("no annotations in grounding text");
  return out;
}

std::string emit_grounding(const std::vector<Annotation>& annotations) {
  if (annotations.empty())
    throw InputError("cannot emit an empty annotation list");
  std::string out;
  for (const Annotation& ann : annotations) {
    if (!std::holds_alternative<NormalizedSpace>(ann.space))
      throw InputError("grounding emission requires normalized space");
    validate_annotation(ann);
    out += kRefStart;
    out += trim(ann.name);
    out += kRefEnd;
    if (const auto* box = std::get_if<BBox>(&ann.geometry)) {
      out += kBoxStart;
      emit_pair(out, {box->x1, box->y1});
      out += ',';
      emit_pair(out, {box->x2, box->y2});
      out += kBoxEnd;
    } else {
      auto points = std::get<std::vector<Point>>(ann.geometry);
      std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
      });
      out += kPointStart;
      for (size_t i = 0; i < points.size(); ++i) {
        if (i > 0) out += ',';
        emit_pair(out, points[i]);
      }
      out += kPointEnd;
    }
  }
  return out;
}

namespace {

double bbox_iou(const BBox& a, const BBox& b) {
  double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  double inter = ix * iy;
  double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  double uni = area_a + area_b - inter;
  return uni <= 0 ? 0.0 : inter / uni;
}

}  // namespace

GroundingOutcome score_grounding(const GroundingCase& grounding_case,
                                 const ScoringPolicy& policy) {
  validate_annotation(grounding_case.ground_truth);
  if (!std::holds_alternative<NormalizedSpace>(grounding_case.ground_truth.space))
    throw InputError("ground truth must be in normalized space");

  std::vector<Annotation> predicted;
  try {
    predicted = parse_grounding(grounding_case.prediction_text);
  } catch (const DataError&) {
    return GroundingOutcome::ParseFailure;
  }

  std::vector<Point> candidates;
  std::vector<BBox> predicted_boxes;
  for (const Annotation& ann : predicted) {
    if (const auto* points = std::get_if<std::vector<Point>>(&ann.geometry)) {
      candidates.insert(candidates.end(), points->begin(), points->end());
    } else {
      const BBox& box = std::get<BBox>(ann.geometry);
      predicted_boxes.push_back(box);
      candidates.push_back(box.center());
    }
  }

  if (const auto* gt_box =
          std::get_if<BBox>(&grounding_case.ground_truth.geometry)) {
    if (policy.bbox_rule == ScoringPolicy::BBoxRule::Iou &&
        !predicted_boxes.empty()) {
      for (const BBox& box : predicted_boxes)
        if (bbox_iou(box, *gt_box) >= policy.iou_threshold)
          return GroundingOutcome::Hit;
      return GroundingOutcome::Miss;
    }
    for (const Point& p : candidates)
      if (gt_box->contains(p)) return GroundingOutcome::Hit;
    return GroundingOutcome::Miss;
  }

  const auto& gt_points =
      std::get<std::vector<Point>>(grounding_case.ground_truth.geometry);
  for (const Point& gt : gt_points)
    for (const Point& p : candidates)
      if (std::hypot(p.x - gt.x, p.y - gt.y) <= policy.point_threshold)
        return GroundingOutcome::Hit;
  return GroundingOutcome::Miss;
}

GroundingReport score_grounding_set(const std::vector<GroundingCase>& cases,
                                    const ScoringPolicy& policy) {
  GroundingReport report;
  for (const GroundingCase& c : cases) {
    ++report.total;
    switch (score_grounding(c, policy)) {
      case GroundingOutcome::Hit:
        ++report.hits;
        break;
      case GroundingOutcome::Miss:
        ++report.misses;
        break;
      case GroundingOutcome::ParseFailure:
        ++report.parse_failures;
        break;
    }
  }
  return report;
}

}  // namespace actkit
