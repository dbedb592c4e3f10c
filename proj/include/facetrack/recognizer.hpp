#pragma once

#include <string>
#include <utility>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/prototypes.hpp"

namespace facetrack {

/// Distinguished open-set label. Never enters a gallery or the tracker sets
/// and is exempt from duplicate resolution.
inline constexpr const char* kUnknownLabel = "Unknown";

struct RecognizerConfig {
  long long min_face_area = 2500;  // px^2; boxes below this are out-of-group
};

/// Keeps exactly the detections with box area >= cfg.min_face_area.
std::vector<Detection> filter_by_area(const std::vector<Detection>& dets,
                                      const RecognizerConfig& cfg);
std::vector<std::pair<Detection, Embedding>> filter_by_area(
    const std::vector<std::pair<Detection, Embedding>>& dets,
    const RecognizerConfig& cfg);

struct Classification {
  std::string label;
  double distance = 0.0;
};

/// Label of the identity owning the globally nearest prototype. Exact ties
/// go to the lexicographically smaller label. Throws on an empty gallery.
Classification classify(const Embedding& e, const PrototypeGallery& gallery);

struct RecognitionResult {
  std::string label;  // kUnknownLabel when rejected or stripped
  double distance = 0.0;
  BBox box;
  Landmarks5 landmarks;
};

/// One frame's post-processing: every label held by two or more results
/// keeps only its minimum-distance holder; the rest become Unknown. Output
/// order matches input order.
std::vector<RecognitionResult> resolve_duplicates(std::vector<RecognitionResult> results);

}  // namespace facetrack
