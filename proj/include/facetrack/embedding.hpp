#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "facetrack/core.hpp"
#include "facetrack/image.hpp"

namespace facetrack {

/// Face chip at the fixed 112x112 recognition resolution.
struct AlignedFace {
  static constexpr int kSize = 112;
  Image image;
  bool operator==(const AlignedFace&) const = default;
};

/// Rotates the frame content so the eye line is horizontal, crops the
/// detection box and resamples it to 112x112 with bilinear interpolation.
/// Regions outside the frame replicate the border; a box fully outside the
/// frame throws std::invalid_argument.
AlignedFace align(const Image& frame, const Detection& det);

/// Test double for a real embedder: one identity is a Gaussian cloud around
/// `mean`. intra_std is the expected norm of a within-identity perturbation
/// (per-component std intra_std / sqrt(D)), so separation-to-intra_std
/// ratios read directly as nearest-mean decision margins.
struct SyntheticIdentityModel {
  std::string label;
  Embedding mean;
  double intra_std = 0.1;
  std::vector<std::uint64_t> pose_seeds;
  double pose_scale = 1.0;  // pose offset norm relative to intra_std
};

/// Pure function of (model, pose_index, noise_seed).
Embedding synthetic_embed(const SyntheticIdentityModel& model, int pose_index,
                          std::uint64_t noise_seed);

/// Pluggable embedder boundary. Implementations must be deterministic
/// (same raster, same embedding) and safe for concurrent read-only use.
class EmbedderBackend {
 public:
  virtual ~EmbedderBackend() = default;
  virtual int dimension() const = 0;
  virtual Embedding embed(const AlignedFace& face) const = 0;
};

/// Raster-projection backend: pools the chip to a small grayscale grid and
/// projects it through a fixed seeded random matrix. Nearby rasters map to
/// nearby embeddings, which keeps augmented copies of a face coherent.
class SyntheticBackend final : public EmbedderBackend {
 public:
  SyntheticBackend(int dimension, std::uint64_t seed);
  int dimension() const override { return dimension_; }
  Embedding embed(const AlignedFace& face) const override;

 private:
  int dimension_;
  std::vector<double> projection_;  // dimension_ x (grid*grid)
};

using BackendFactory =
    std::function<std::unique_ptr<EmbedderBackend>(int dimension, std::uint64_t seed)>;

/// Registers an embedder under a name selectable from configuration.
void register_backend(const std::string& name, BackendFactory factory);

/// Creates a backend by name ("synthetic" ships built in). Throws
/// std::invalid_argument for unknown names.
std::unique_ptr<EmbedderBackend> make_backend(const std::string& name, int dimension,
                                              std::uint64_t seed);

}  // namespace facetrack
