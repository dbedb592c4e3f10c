#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/tracker.hpp"

namespace facetrack {

/// Per-frame labeled boxes. One text file per frame: "{N}.txt" holds lines
/// `label x y w h`; a missing file means no faces in that frame.
struct GroundTruth {
  std::map<long, std::vector<std::pair<std::string, BBox>>> frames;

  long max_frame() const;
  bool empty() const { return frames.empty(); }
};

/// Parses every "{N}.txt" in the directory. Malformed lines raise
/// std::runtime_error naming the file and line number.
GroundTruth load_ground_truth(const std::filesystem::path& directory);
void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& directory);

struct ScoreReport {
  std::map<std::string, double> per_label_accuracy;
  std::map<std::string, long> label_gt_frames;
  std::map<std::string, long> label_matched_frames;
  /// Labels emitted in the results but never present in GT (Unknown is not
  /// listed). Excluded from the average.
  std::vector<std::string> spurious_labels;
  double average_accuracy = 0.0;  // unweighted mean over GT labels
  long frames_scored = 0;
  long classify_invocations = 0;  // filled by the caller from run stats
  double seconds_per_frame = 0.0;
};

/// Per label P: the fraction of P's GT frames in which some output face
/// labeled P overlaps P's GT box with IoU >= iou_threshold. Unknown never
/// matches anything.
ScoreReport score(const VidResult& vid, const GroundTruth& gt, double iou_threshold = 0.5);

struct TimingReport {
  double baseline_sec_per_frame = 0.0;
  double candidate_sec_per_frame = 0.0;
  double speedup = 0.0;  // baseline / candidate
};

/// Throws std::invalid_argument unless both rates are positive (a run over
/// zero frames has no rate).
TimingReport timing_report(double baseline_sec_per_frame, double candidate_sec_per_frame);

}  // namespace facetrack
