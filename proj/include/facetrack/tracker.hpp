#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/recognizer.hpp"

namespace facetrack {

struct TrackerConfig {
  double init_window_seconds = 2.0;
  int max_cont_appearances = 10;
  int min_appearances = 5;
  double promotion_ratio = 0.5;
  double minor_movement_iou = 0.5;
  int skip_frames = 0;
};

/// One tracked identity.
struct TrackEntry {
  std::string label;
  BBox box;
  Landmarks5 landmarks;
  long tot_appearances = 0;
  long tot_frames_processed = 0;  // processed frames since first appearance
  int cont_appearances = 0;       // saturating continuous-presence counter
  double last_distance = 0.0;
};

enum class FaceSource { kRecognized, kReused, kOccluded, kSkipped };

const char* to_string(FaceSource source);
FaceSource face_source_from_string(std::string_view name);

struct FaceRecord {
  std::string label;
  BBox box;
  Landmarks5 landmarks;
  double distance = 0.0;
  FaceSource source = FaceSource::kRecognized;
};

struct FrameResult {
  long frame_index = 0;
  std::vector<FaceRecord> faces;
};

struct VidResult {
  double fps = 0.0;
  std::vector<FrameResult> frames;
};

/// ActiveSet holds identities that appear consistently; InactiveSet holds
/// the ones still in doubt. The label sets are always disjoint.
struct TrackerState {
  std::map<std::string, TrackEntry> active;
  std::map<std::string, TrackEntry> inactive;
};

struct TrackerStats {
  long classify_invocations = 0;
  long frames_processed = 0;
  long frames_copied = 0;
  double total_seconds = 0.0;

  double seconds_per_frame() const {
    const long n = frames_processed + frames_copied;
    return n > 0 ? total_seconds / double(n) : 0.0;
  }
};

/// Builds the Active/Inactive split from an already classified and
/// duplicate-resolved initial window. A label whose appearance ratio over
/// the frames since it first appeared reaches cfg.promotion_ratio starts
/// active with a saturated continuity counter.
TrackerState initialize(const std::vector<FrameResult>& initial_frames,
                        const TrackerConfig& cfg);

/// One processed frame over area-filtered detections: IoU reuse against the
/// ActiveSet, classification of the rest, InactiveSet updates with
/// promotion, the missing-face pass, and duplicate stripping.
FrameResult process_frame(TrackerState& state, long frame_index,
                          const std::vector<std::pair<Detection, Embedding>>& detections,
                          const PrototypeGallery& gallery, const TrackerConfig& cfg,
                          TrackerStats* stats = nullptr);

/// Occlusion/disappearance pass. Active entries seen this frame climb their
/// continuity counter (capped); unseen ones decrement it, then either emit a
/// present-occluded record at their last box or demote to the InactiveSet.
void check_for_missing_faces(TrackerState& state, const std::set<std::string>& seen_labels,
                             const TrackerConfig& cfg, FrameResult& frame_out);

struct StreamFrame {
  long frame_index = 0;
  std::vector<std::pair<Detection, Embedding>> faces;
};

/// Ordered frame source with fps metadata.
class FrameStream {
 public:
  virtual ~FrameStream() = default;
  virtual double fps() const = 0;
  /// Next frame, or nullopt at end of stream. May throw on stream faults.
  virtual std::optional<StreamFrame> next() = 0;
};

class VectorStream final : public FrameStream {
 public:
  VectorStream(double fps, std::vector<StreamFrame> frames)
      : fps_(fps), frames_(std::move(frames)) {}
  double fps() const override { return fps_; }
  std::optional<StreamFrame> next() override {
    if (index_ >= frames_.size()) return std::nullopt;
    return frames_[index_++];
  }

 private:
  double fps_;
  std::vector<StreamFrame> frames_;
  std::size_t index_ = 0;
};

struct ProcessOutput {
  VidResult vid;
  TrackerStats stats;
  TrackerState final_state;
  /// Set when the stream faulted; vid holds everything up to the fault.
  std::optional<std::string> fault;
};

/// Full pipeline: init window at full rate, then every (skip_frames + 1)-th
/// frame through process_frame; the frames in between copy the ActiveSet
/// verbatim with source = skipped.
ProcessOutput process_video(FrameStream& stream, const PrototypeGallery& gallery,
                            const TrackerConfig& cfg, const RecognizerConfig& rec_cfg);

// Line-delimited text serialization. Timing is kept out of this file so
// equal-seed runs are byte-identical.
void save_vid_result(const VidResult& vid, const std::filesystem::path& path);
VidResult load_vid_result(const std::filesystem::path& path);

}  // namespace facetrack
