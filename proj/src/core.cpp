#include "facetrack/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace facetrack {

double iou(const BBox& a, const BBox& b) {
  const int ix = std::max(a.x, b.x);
  const int iy = std::max(a.y, b.y);
  const int ix2 = std::min(a.right(), b.right());
  const int iy2 = std::min(a.bottom(), b.bottom());
  const long long iw = std::max(0, ix2 - ix);
  const long long ih = std::max(0, iy2 - iy);
  const long long inter = iw * ih;
  if (inter == 0) return 0.0;
  const long long uni = a.area() + b.area() - inter;
  return double(inter) / double(uni);
}

Landmarks5 Landmarks5::canonical() const {
  Landmarks5 out = *this;
  if (out.left_eye.x > out.right_eye.x) std::swap(out.left_eye, out.right_eye);
  return out;
}

double distance(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("embedding dimension mismatch: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace facetrack
