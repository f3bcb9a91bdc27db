#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "actkit/annotation.hpp"

namespace actkit {

/// Parses one or more grounding annotations from the delimiter grammar
/// `<|object_ref_start|>NAME<|object_ref_end|>` followed by either
/// `<|bbox_start|>(x1,y1),(x2,y2)<|bbox_end|>` or
/// `<|point_start|>(x,y)[,(x,y)...]<|point_end|>`. Coordinates are
/// normalized integers. Throws DataError on unbalanced delimiters,
/// non-integer or out-of-range coordinates, or a bbox with corners out of
/// order.
std::vector<Annotation> parse_grounding(std::string_view text);

/// Canonical emission: no whitespace, trimmed names, points sorted by (y, x).
/// parse(emit(a)) == canonicalized a.
std::string emit_grounding(const std::vector<Annotation>& annotations);

struct GroundingCase {
  std::string image_ref;
  std::string target_name;
  Annotation ground_truth;     // normalized space
  std::string prediction_text;  // raw model output
};

enum class GroundingOutcome { Hit, Miss, ParseFailure };

struct ScoringPolicy {
  enum class BBoxRule { CenterContainment, Iou };

  double point_threshold = 25.0;  // normalized units
  BBoxRule bbox_rule = BBoxRule::CenterContainment;
  double iou_threshold = 0.5;
};

/// Rule-based grader. Candidate points are every predicted point plus the
/// center of every predicted bbox. A bbox ground truth hits when any
/// candidate lies inside it (inclusive); a point ground truth hits when any
/// candidate lies within point_threshold. Under the Iou rule a bbox ground
/// truth instead requires a predicted bbox with IoU >= iou_threshold.
/// Unparseable or empty predictions are ParseFailure.
GroundingOutcome score_grounding(const GroundingCase& grounding_case,
                                 const ScoringPolicy& policy = {});

struct GroundingReport {
  int total = 0;
  int hits = 0;
  int misses = 0;
  int parse_failures = 0;

  /// Hits over total; parse failures count against accuracy.
  double accuracy() const { return total == 0 ? 0.0 : double(hits) / total; }
};

GroundingReport score_grounding_set(const std::vector<GroundingCase>& cases,
                                    const ScoringPolicy& policy = {});

}  // namespace actkit
