#pragma once

#include <map>
#include <string>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/image.hpp"
#include "facetrack/recognizer.hpp"
#include "facetrack/tracker.hpp"

namespace facetrack {

struct EyeBoxConfig {
  double width_factor = 2.0;   // box width as a multiple of inter-ocular distance
  double height_factor = 0.8;  // box height likewise
  int min_width = 16;          // fallback for coincident eye points
  int min_height = 8;
};

/// Redaction box centered on the eye midpoint, sized from the inter-ocular
/// distance and clamped to the frame. Coincident eyes fall back to the
/// configured minimum box.
BBox eye_box(const Landmarks5& lm, int frame_width, int frame_height,
             const EyeBoxConfig& cfg = {});

/// Black-fills the eye box of every face; pixels outside the boxes are
/// untouched.
void redact_frame(Image& frame, const std::vector<Landmarks5>& faces,
                  const EyeBoxConfig& cfg = {});
void redact_frame(Image& frame, const std::vector<RecognitionResult>& faces,
                  const EyeBoxConfig& cfg = {});

/// Inclusive frame interval during which a label is present.
struct PresenceInterval {
  long start_frame = 0;
  long end_frame = 0;
  bool operator==(const PresenceInterval&) const = default;
};

struct ParticipationMap {
  double fps = 0.0;
  long total_frames = 0;
  std::map<std::string, std::vector<PresenceInterval>> rows;
};

/// Per-label presence runs over the emitted frames (Unknown excluded).
/// Gaps shorter than gap_merge_seconds are bridged; pass 0 for the raw
/// run-length encoding.
ParticipationMap participation_map(const VidResult& vid, double gap_merge_seconds = 1.0);

/// SVG 1.1 timeline: one row per label, presence rendered as blue blocks
/// over video time in seconds. When url_template is non-empty each row
/// carries an anchor with {label} and {time} substituted.
std::string participation_svg(const ParticipationMap& map,
                              const std::string& url_template = "");

}  // namespace facetrack
