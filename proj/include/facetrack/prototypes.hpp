#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/embedding.hpp"
#include "facetrack/rng.hpp"

namespace facetrack {

/// Labeled training footage: parallel lists of face chips and embeddings.
struct TrainingClip {
  std::string identity;
  std::vector<AlignedFace> faces;
  std::vector<Embedding> embeddings;
  double fps = 30.0;
};

struct ClusteringConfig {
  int k = 1;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double convergence_tol = 1e-6;  // relative cost change
  int restarts = 10;
};

struct AugmentationConfig {
  double flip_threshold = 0.5;  // flip when the random token is <= this
  double rotation_min_deg = -45.0;
  double rotation_max_deg = 45.0;
  double translate_min_px = -10.0;
  double translate_max_px = 10.0;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double shear_min = -0.1;
  double shear_max = 0.1;
  int copies_per_image = 10;
  std::uint64_t seed = 0;
};

struct AugmentParams {
  bool flip = false;
  double rotation_deg = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double scale = 1.0;
  double shear = 0.0;
};

AugmentParams draw_augment_params(const AugmentationConfig& cfg, Rng& rng);

/// Applies flip, rotation, translation, scale and shear in that order,
/// composed into one affine warp with bilinear sampling and reflection
/// padding, re-cropped to 112x112.
AlignedFace apply_augmentation(const AlignedFace& face, const AugmentParams& params);

/// copies_per_image transformed copies of `face`, fully determined by the
/// rng state.
std::vector<AlignedFace> augment(const AlignedFace& face, const AugmentationConfig& cfg,
                                 Rng& rng);

/// Sample indices 0, fps, 2*fps, ... (floored): one sample per second.
std::vector<std::size_t> sparse_sample_indices(std::size_t frame_count, double fps);

/// The clip restricted to its sparse sample.
TrainingClip sparse_sample(const TrainingClip& clip);

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<Embedding> centroids;
  double cost = 0.0;  // sum of squared distances to assigned centroids
};

/// Lloyd iterations from k-means++ seeding; best of cfg.restarts runs.
/// Cost is checked to be non-increasing across iterations on every run.
/// Throws std::invalid_argument when k < 1, points are empty, or k exceeds
/// the number of points.
KMeansResult kmeans(const std::vector<Embedding>& points, const ClusteringConfig& cfg);

/// For each centroid, the index of the closest actual point; ties break to
/// the lowest index.
std::vector<std::size_t> nearest_to_centroids(const std::vector<Embedding>& points,
                                              const std::vector<Embedding>& centroids);

/// Per-identity prototype embeddings. Every prototype is bit-equal to the
/// embedding of some training sample.
struct PrototypeGallery {
  struct Entry {
    std::vector<Embedding> prototypes;
    std::vector<std::size_t> source_indices;
  };
  std::map<std::string, Entry> identities;

  bool empty() const;
  int dimension() const;  // 0 when empty
  std::size_t prototype_count() const;
};

enum class GalleryMethod { kSamplingOnly, kKMeansOnly, kSamplingThenKMeans };

GalleryMethod gallery_method_from_string(const std::string& name);
const char* to_string(GalleryMethod method);

struct GalleryBuildConfig {
  GalleryMethod method = GalleryMethod::kSamplingOnly;
  bool augment = false;
  ClusteringConfig clustering;
  AugmentationConfig augmentation;
};

/// Per identity: [augment] -> [sparse sample] -> [k-means + nearest image].
/// Augmented faces are embedded with `embedder`, which is required when
/// cfg.augment is set. `threads` caps per-identity workers.
PrototypeGallery build_gallery(const std::vector<TrainingClip>& clips,
                               const GalleryBuildConfig& cfg,
                               const EmbedderBackend* embedder = nullptr,
                               int threads = 1);

// Text gallery file: `dim D`, then per identity a header line and one
// prototype vector per line, printed with full double precision.
void save_gallery(const PrototypeGallery& gallery, const std::filesystem::path& path);
PrototypeGallery load_gallery(const std::filesystem::path& path);

}  // namespace facetrack
