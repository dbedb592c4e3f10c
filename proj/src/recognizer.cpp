#include "facetrack/recognizer.hpp"

#include <limits>
#include <map>
#include <stdexcept>

namespace facetrack {

std::vector<Detection> filter_by_area(const std::vector<Detection>& dets,
                                      const RecognizerConfig& cfg) {
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const Detection& d : dets) {
    if (d.box.area() >= cfg.min_face_area) kept.push_back(d);
  }
  return kept;
}

std::vector<std::pair<Detection, Embedding>> filter_by_area(
    const std::vector<std::pair<Detection, Embedding>>& dets,
    const RecognizerConfig& cfg) {
  std::vector<std::pair<Detection, Embedding>> kept;
  kept.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.first.box.area() >= cfg.min_face_area) kept.push_back(d);
  }
  return kept;
}

Classification classify(const Embedding& e, const PrototypeGallery& gallery) {
  if (gallery.empty()) {
    throw std::invalid_argument("classify: gallery has no prototypes");
  }
  Classification best;
  double best_d = std::numeric_limits<double>::max();
  // identities is an ordered map, so on exact distance ties the
  // lexicographically smaller label is reached first and kept.
  for (const auto& [label, entry] : gallery.identities) {
    for (const Embedding& proto : entry.prototypes) {
      const double d = distance(e, proto);
      if (d < best_d) {
        best_d = d;
        best.label = label;
      }
    }
  }
  best.distance = best_d;
  return best;
}

std::vector<RecognitionResult> resolve_duplicates(std::vector<RecognitionResult> results) {
  // Per label, locate the minimum-distance holder (first wins exact ties).
  std::map<std::string, std::size_t> keeper;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RecognitionResult& r = results[i];
    if (r.label == kUnknownLabel) continue;
    const auto it = keeper.find(r.label);
    if (it == keeper.end() || r.distance < results[it->second].distance) {
      keeper[r.label] = i;
    }
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    RecognitionResult& r = results[i];
    if (r.label == kUnknownLabel) continue;
    if (keeper[r.label] != i) r.label = kUnknownLabel;
  }
  return results;
}

}  // namespace facetrack
