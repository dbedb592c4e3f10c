#pragma once

#include <string>
#include <vector>

namespace facetrack {

/// Axis-aligned box in source-frame pixel coordinates.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return 1LL * w * h; }
  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool operator==(const BBox&) const = default;
};

/// Intersection-over-union of two boxes, in [0, 1]. Symmetric.
double iou(const BBox& a, const BBox& b);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Five-point face landmarks: two eyes, nose, two mouth corners.
struct Landmarks5 {
  Point2 left_eye;
  Point2 right_eye;
  Point2 nose;
  Point2 mouth_left;
  Point2 mouth_right;

  /// Swaps the eye points if needed so that left_eye.x <= right_eye.x.
  Landmarks5 canonical() const;
  bool operator==(const Landmarks5&) const = default;
};

/// Fixed-dimension feature vector for one aligned face.
using Embedding = std::vector<double>;

/// Euclidean distance. Throws std::invalid_argument on dimension mismatch.
double distance(const Embedding& a, const Embedding& b);

/// One detected face in one frame.
struct Detection {
  long frame_index = 0;
  BBox box;
  Landmarks5 landmarks;
  double confidence = 1.0;
};

}  // namespace facetrack
