#include "facetrack/embedding.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "facetrack/rng.hpp"

namespace facetrack {

AlignedFace align(const Image& frame, const Detection& det) {
  const BBox& box = det.box;
  if (box.w <= 0 || box.h <= 0) throw std::invalid_argument("align: empty detection box");
  if (box.right() <= 0 || box.bottom() <= 0 || box.x >= frame.width ||
      box.y >= frame.height) {
    throw std::invalid_argument("align: detection box fully outside the frame");
  }

  const Landmarks5 lm = det.landmarks.canonical();
  const double dy = lm.right_eye.y - lm.left_eye.y;
  const double dx = lm.right_eye.x - lm.left_eye.x;
  const double theta = std::atan2(dy, dx);
  const Point2 eye_mid{(lm.left_eye.x + lm.right_eye.x) / 2.0,
                       (lm.left_eye.y + lm.right_eye.y) / 2.0};

  // Output pixel -> box coordinates -> source coordinates of the frame
  // rotated by -theta about the eye midpoint. Sampling uses the forward
  // rotation, which is the inverse of the content rotation.
  const int n = AlignedFace::kSize;
  const double sx = double(box.w) / n;
  const double sy = double(box.h) / n;
  const Affine rot = Affine::rotation_about(theta, eye_mid);

  AlignedFace face;
  face.image = Image::filled(n, n, frame.channels, 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const Point2 p{box.x + (x + 0.5) * sx - 0.5, box.y + (y + 0.5) * sy - 0.5};
      const Point2 s = rot.apply(p);
      for (int c = 0; c < frame.channels; ++c) {
        const double v = sample_bilinear(frame, s.x, s.y, c, Border::kReplicate);
        face.image.at(x, y, c) =
            std::uint8_t(std::lround(std::min(255.0, std::max(0.0, v))));
      }
    }
  }
  return face;
}

Embedding synthetic_embed(const SyntheticIdentityModel& model, int pose_index,
                          std::uint64_t noise_seed) {
  if (model.mean.empty()) throw std::invalid_argument("synthetic_embed: empty mean");
  if (model.intra_std < 0.0) throw std::invalid_argument("synthetic_embed: intra_std < 0");

  const std::size_t d = model.mean.size();
  const double comp_std = model.intra_std / std::sqrt(double(d));
  Embedding e = model.mean;

  if (!model.pose_seeds.empty()) {
    const std::uint64_t ps =
        model.pose_seeds[std::size_t(pose_index) % model.pose_seeds.size()];
    Rng pose_rng(mix_seed(ps, {0x706f7365ull}));
    const double pose_std = comp_std * model.pose_scale;
    for (std::size_t i = 0; i < d; ++i) e[i] += pose_std * pose_rng.normal();
  }

  Rng noise_rng(mix_seed(noise_seed, {fnv1a(model.label), std::uint64_t(pose_index)}));
  for (std::size_t i = 0; i < d; ++i) e[i] += comp_std * noise_rng.normal();
  return e;
}

SyntheticBackend::SyntheticBackend(int dimension, std::uint64_t seed)
    : dimension_(dimension) {
  if (dimension <= 0) throw std::invalid_argument("backend dimension must be positive");
  constexpr int kGrid = 8;
  Rng rng(mix_seed(seed, {0x70726f6aull}));
  projection_.resize(std::size_t(dimension) * kGrid * kGrid);
  for (double& w : projection_) w = rng.normal() / double(kGrid);
}

Embedding SyntheticBackend::embed(const AlignedFace& face) const {
  constexpr int kGrid = 8;
  const Image& img = face.image;
  // Grayscale average pool to a kGrid x kGrid thumbnail.
  double cells[kGrid * kGrid] = {};
  const int cell = AlignedFace::kSize / kGrid;
  for (int gy = 0; gy < kGrid; ++gy) {
    for (int gx = 0; gx < kGrid; ++gx) {
      double sum = 0.0;
      for (int y = gy * cell; y < (gy + 1) * cell; ++y) {
        for (int x = gx * cell; x < (gx + 1) * cell; ++x) {
          double px = 0.0;
          for (int c = 0; c < img.channels; ++c) px += img.at(x, y, c);
          sum += px / img.channels;
        }
      }
      cells[gy * kGrid + gx] = sum / double(cell * cell) / 255.0;
    }
  }
  Embedding e(std::size_t(dimension_), 0.0);
  for (int d = 0; d < dimension_; ++d) {
    double acc = 0.0;
    const double* row = projection_.data() + std::size_t(d) * kGrid * kGrid;
    for (int i = 0; i < kGrid * kGrid; ++i) acc += row[i] * cells[i];
    e[std::size_t(d)] = acc;
  }
  return e;
}

namespace {

std::map<std::string, BackendFactory>& backend_registry() {
  static std::map<std::string, BackendFactory> registry;
  return registry;
}
std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_backend(const std::string& name, BackendFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  backend_registry()[name] = std::move(factory);
}

std::unique_ptr<EmbedderBackend> make_backend(const std::string& name, int dimension,
                                              std::uint64_t seed) {
  if (name == "synthetic") return std::make_unique<SyntheticBackend>(dimension, seed);
  std::lock_guard<std::mutex> lock(registry_mutex());
  const auto it = backend_registry().find(name);
  if (it == backend_registry().end()) {
    throw std::invalid_argument("unknown embedder backend: " + name);
  }
  return it->second(dimension, seed);
}

}  // namespace facetrack
