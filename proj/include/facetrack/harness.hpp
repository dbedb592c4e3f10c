#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/embedding.hpp"
#include "facetrack/evaluation.hpp"
#include "facetrack/prototypes.hpp"
#include "facetrack/tracker.hpp"

namespace facetrack {

/// Inclusive frame interval during which the detector misses the face.
/// A partial occlusion keeps the face in ground truth; a full one removes it.
struct OcclusionInterval {
  long start = 0;
  long end = 0;
  bool partial = true;
};

struct IdentityScript {
  SyntheticIdentityModel model;
  long entry_frame = 0;
  long exit_frame = 0;  // inclusive
  std::vector<std::pair<long, BBox>> path;  // keyframes, piecewise-linear
  std::vector<OcclusionInterval> occlusions;
};

/// Small-area distractor with an out-of-gallery embedding cloud.
struct BackgroundFace {
  BBox box;
  Embedding mean;
  double intra_std = 0.05;
  long entry_frame = 0;
  long exit_frame = 0;
};

struct ScenarioSpec {
  double fps = 30.0;
  long total_frames = 0;
  std::uint64_t seed = 0;
  std::vector<IdentityScript> identities;
  std::vector<BackgroundFace> background;

  /// Throws std::invalid_argument listing every violation.
  void validate(long long max_background_area = 2500) const;
};

struct SyntheticStream {
  double fps = 0.0;
  std::vector<StreamFrame> frames;
  GroundTruth ground_truth;
};

/// Deterministic given spec.seed. Occluded frames emit no detection; ground
/// truth keeps partially occluded faces and drops fully occluded ones.
SyntheticStream generate(const ScenarioSpec& spec);

/// Training clips for every scripted identity, drawn from a seed stream
/// disjoint from the test stream's, with synthetic chip rasters so the
/// augmentation path has pixels to work on.
std::vector<TrainingClip> training_clips_from(const ScenarioSpec& spec,
                                              int frames_per_identity);

/// Textured 112x112 chip for one identity/pose; deterministic.
AlignedFace synthetic_face_raster(const SyntheticIdentityModel& model, int pose_index,
                                  std::uint64_t seed);

/// Box position at a frame, interpolating the keyframe path.
BBox box_at(const IdentityScript& script, long frame);

/// Canonical landmark placement inside a box.
Landmarks5 landmarks_for_box(const BBox& box);

/// `identity_count` static identities on a grid, with the given
/// inter-mean-distance to intra-std ratio. Good as a base for tests and
/// demos; callers add occlusions/motion as needed.
ScenarioSpec make_grid_scenario(int identity_count, double separation, long total_frames,
                                double fps, std::uint64_t seed, int dimension = 16);

/// Adds `count` always-present distractors with boxes below the area
/// threshold and far-away embedding means.
void add_background_faces(ScenarioSpec& spec, int count, long long max_area = 2500);

// Scenario files are JSON; streams are a line-oriented text format that
// round-trips embeddings exactly.
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);
ScenarioSpec load_scenario(const std::filesystem::path& path);
void save_stream(const SyntheticStream& stream, const std::filesystem::path& path);
SyntheticStream load_stream(const std::filesystem::path& path);  // ground_truth left empty

}  // namespace facetrack
