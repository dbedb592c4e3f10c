#include "facetrack/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace facetrack {

AugmentParams draw_augment_params(const AugmentationConfig& cfg, Rng& rng) {
  AugmentParams p;
  p.flip = rng.uniform() <= cfg.flip_threshold;
  p.rotation_deg = rng.uniform(cfg.rotation_min_deg, cfg.rotation_max_deg);
  p.tx = rng.uniform(cfg.translate_min_px, cfg.translate_max_px);
  p.ty = rng.uniform(cfg.translate_min_px, cfg.translate_max_px);
  p.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  p.shear = rng.uniform(cfg.shear_min, cfg.shear_max);
  return p;
}

AlignedFace apply_augmentation(const AlignedFace& face, const AugmentParams& params) {
  const int n = AlignedFace::kSize;
  const Point2 center{(n - 1) / 2.0, (n - 1) / 2.0};

  Affine fwd = Affine::identity();
  if (params.flip) fwd = fwd.then(Affine::hflip(n));
  fwd = fwd.then(
      Affine::rotation_about(params.rotation_deg * std::numbers::pi / 180.0, center));
  fwd = fwd.then(Affine::translation(params.tx, params.ty));
  fwd = fwd.then(Affine::scale_about(params.scale, center));
  fwd = fwd.then(Affine::shear_about(params.shear, center));

  AlignedFace out;
  out.image = warp_affine(face.image, fwd.inverse(), n, n, Border::kReflect);
  return out;
}

std::vector<AlignedFace> augment(const AlignedFace& face, const AugmentationConfig& cfg,
                                 Rng& rng) {
  if (cfg.copies_per_image < 1) {
    throw std::invalid_argument("copies_per_image must be >= 1");
  }
  std::vector<AlignedFace> out;
  out.reserve(std::size_t(cfg.copies_per_image));
  for (int i = 0; i < cfg.copies_per_image; ++i) {
    out.push_back(apply_augmentation(face, draw_augment_params(cfg, rng)));
  }
  return out;
}

std::vector<std::size_t> sparse_sample_indices(std::size_t frame_count, double fps) {
  if (fps <= 0.0) throw std::invalid_argument("fps must be positive");
  std::vector<std::size_t> indices;
  for (std::size_t j = 0;; ++j) {
    const std::size_t idx = std::size_t(std::floor(double(j) * fps));
    if (idx >= frame_count) break;
    indices.push_back(idx);
  }
  return indices;
}

TrainingClip sparse_sample(const TrainingClip& clip) {
  TrainingClip out;
  out.identity = clip.identity;
  out.fps = clip.fps;
  const std::size_t n = std::max(clip.faces.size(), clip.embeddings.size());
  for (std::size_t idx : sparse_sample_indices(n, clip.fps)) {
    if (idx < clip.faces.size()) out.faces.push_back(clip.faces[idx]);
    if (idx < clip.embeddings.size()) out.embeddings.push_back(clip.embeddings[idx]);
  }
  return out;
}

namespace {

double sq_dist(const Embedding& a, const Embedding& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::vector<Embedding> kmeanspp_init(const std::vector<Embedding>& points, int k,
                                     Rng& rng) {
  std::vector<Embedding> centroids;
  centroids.reserve(std::size_t(k));
  centroids.push_back(points[std::size_t(rng.uniform_int(0, std::int64_t(points.size()) - 1))]);
  std::vector<double> d2(points.size());
  while (int(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::max();
      for (const Embedding& c : centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with a centroid already; spread over the rest.
      pick = std::size_t(rng.uniform_int(0, std::int64_t(points.size()) - 1));
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

KMeansResult lloyd_run(const std::vector<Embedding>& points, const ClusteringConfig& cfg,
                       std::uint64_t seed) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  Rng rng(seed);

  KMeansResult res;
  res.centroids = kmeanspp_init(points, cfg.k, rng);
  res.assignments.assign(n, 0);

  double prev_cost = std::numeric_limits<double>::max();
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // Assignment step; ties go to the lowest centroid index.
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      int best_c = 0;
      for (int c = 0; c < cfg.k; ++c) {
        const double d = sq_dist(points[i], res.centroids[std::size_t(c)]);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      res.assignments[i] = best_c;
      cost += best;
    }

    // Lloyd guarantees a non-increasing objective; a rise means a bug.
    if (cost > prev_cost * (1.0 + 1e-12) + 1e-12) {
      throw std::logic_error("k-means cost increased between iterations");
    }
    const bool converged =
        prev_cost < std::numeric_limits<double>::max() &&
        (prev_cost - cost) <= cfg.convergence_tol * std::max(prev_cost, 1e-300);
    res.cost = cost;
    // Stop before the update step so assignments, centroids and cost stay
    // mutually consistent in the returned result.
    if (converged || iter + 1 == cfg.max_iterations) break;
    prev_cost = cost;

    // Update step: means of assigned points.
    std::vector<Embedding> sums(std::size_t(cfg.k), Embedding(dim, 0.0));
    std::vector<long> counts(std::size_t(cfg.k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = std::size_t(res.assignments[i]);
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
      ++counts[c];
    }
    for (int c = 0; c < cfg.k; ++c) {
      if (counts[std::size_t(c)] == 0) {
        // Re-seed an empty cluster at the point farthest from its centroid;
        // that point's cost drops to zero, so the objective cannot rise.
        std::size_t far_i = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d =
              sq_dist(points[i], res.centroids[std::size_t(res.assignments[i])]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        res.centroids[std::size_t(c)] = points[far_i];
      } else {
        for (std::size_t j = 0; j < dim; ++j) {
          res.centroids[std::size_t(c)][j] =
              sums[std::size_t(c)][j] / double(counts[std::size_t(c)]);
        }
      }
    }
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const std::vector<Embedding>& points, const ClusteringConfig& cfg) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (cfg.k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (std::size_t(cfg.k) > points.size()) {
    throw std::invalid_argument("kmeans: k (" + std::to_string(cfg.k) +
                                ") exceeds point count (" +
                                std::to_string(points.size()) + ")");
  }
  if (cfg.max_iterations < 1) throw std::invalid_argument("kmeans: max_iterations >= 1");

  KMeansResult best;
  best.cost = std::numeric_limits<double>::max();
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = lloyd_run(points, cfg, mix_seed(cfg.seed, {std::uint64_t(r)}));
    if (run.cost < best.cost) best = std::move(run);
  }
  return best;
}

std::vector<std::size_t> nearest_to_centroids(const std::vector<Embedding>& points,
                                              const std::vector<Embedding>& centroids) {
  std::vector<std::size_t> out;
  out.reserve(centroids.size());
  for (const Embedding& c : centroids) {
    std::size_t best_i = 0;
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = sq_dist(points[i], c);
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        best_i = i;
      }
    }
    out.push_back(best_i);
  }
  return out;
}

bool PrototypeGallery::empty() const {
  for (const auto& [label, entry] : identities) {
    if (!entry.prototypes.empty()) return false;
  }
  return true;
}

int PrototypeGallery::dimension() const {
  for (const auto& [label, entry] : identities) {
    if (!entry.prototypes.empty()) return int(entry.prototypes.front().size());
  }
  return 0;
}

std::size_t PrototypeGallery::prototype_count() const {
  std::size_t n = 0;
  for (const auto& [label, entry] : identities) n += entry.prototypes.size();
  return n;
}

GalleryMethod gallery_method_from_string(const std::string& name) {
  if (name == "sampling") return GalleryMethod::kSamplingOnly;
  if (name == "kmeans") return GalleryMethod::kKMeansOnly;
  if (name == "sampling+kmeans") return GalleryMethod::kSamplingThenKMeans;
  throw std::invalid_argument("unknown gallery method: " + name);
}

const char* to_string(GalleryMethod method) {
  switch (method) {
    case GalleryMethod::kSamplingOnly: return "sampling";
    case GalleryMethod::kKMeansOnly: return "kmeans";
    case GalleryMethod::kSamplingThenKMeans: return "sampling+kmeans";
  }
  return "?";
}

namespace {

PrototypeGallery::Entry build_identity(const std::string& identity,
                                       std::vector<TrainingClip> clips,
                                       const GalleryBuildConfig& cfg,
                                       const EmbedderBackend* embedder) {
  // Stage 1: optional augmentation, embedding every generated chip.
  if (cfg.augment) {
    if (embedder == nullptr) {
      throw std::invalid_argument("build_gallery: augmentation requires an embedder");
    }
    for (TrainingClip& clip : clips) {
      AugmentationConfig acfg = cfg.augmentation;
      Rng rng(mix_seed(acfg.seed, {fnv1a(identity)}));
      TrainingClip augmented;
      augmented.identity = clip.identity;
      augmented.fps = clip.fps;
      for (const AlignedFace& face : clip.faces) {
        for (AlignedFace& copy : augment(face, acfg, rng)) {
          augmented.embeddings.push_back(embedder->embed(copy));
          augmented.faces.push_back(std::move(copy));
        }
      }
      clip = std::move(augmented);
    }
  }

  // Stage 2: optional sparse sampling, then pool samples across clips.
  std::vector<Embedding> samples;
  for (TrainingClip& clip : clips) {
    if (cfg.method != GalleryMethod::kKMeansOnly) clip = sparse_sample(clip);
    for (Embedding& e : clip.embeddings) samples.push_back(std::move(e));
  }
  if (samples.empty()) {
    throw std::runtime_error("identity '" + identity + "' has no samples after sampling");
  }

  PrototypeGallery::Entry entry;
  if (cfg.method == GalleryMethod::kSamplingOnly) {
    entry.prototypes = std::move(samples);
    entry.source_indices.resize(entry.prototypes.size());
    for (std::size_t i = 0; i < entry.source_indices.size(); ++i) {
      entry.source_indices[i] = i;
    }
    return entry;
  }

  // Stage 3: k-means and nearest-image selection.
  ClusteringConfig kcfg = cfg.clustering;
  kcfg.seed = mix_seed(kcfg.seed, {fnv1a(identity)});
  const KMeansResult km = kmeans(samples, kcfg);
  for (std::size_t idx : nearest_to_centroids(samples, km.centroids)) {
    entry.prototypes.push_back(samples[idx]);
    entry.source_indices.push_back(idx);
  }
  return entry;
}

}  // namespace

PrototypeGallery build_gallery(const std::vector<TrainingClip>& clips,
                               const GalleryBuildConfig& cfg,
                               const EmbedderBackend* embedder, int threads) {
  std::map<std::string, std::vector<TrainingClip>> by_identity;
  for (const TrainingClip& clip : clips) {
    if (clip.identity.empty()) throw std::invalid_argument("clip with empty identity");
    if (clip.embeddings.empty() && clip.faces.empty()) {
      throw std::runtime_error("identity '" + clip.identity + "' has an empty clip");
    }
    by_identity[clip.identity].push_back(clip);
  }
  if (by_identity.empty()) throw std::invalid_argument("build_gallery: no clips");

  PrototypeGallery gallery;
  if (threads <= 1 || by_identity.size() == 1) {
    for (auto& [identity, id_clips] : by_identity) {
      gallery.identities[identity] =
          build_identity(identity, std::move(id_clips), cfg, embedder);
    }
    return gallery;
  }

  std::vector<std::pair<std::string, std::future<PrototypeGallery::Entry>>> jobs;
  for (auto& [identity, id_clips] : by_identity) {
    jobs.emplace_back(identity,
                      std::async(std::launch::async, build_identity, identity,
                                 std::move(id_clips), cfg, embedder));
    if (int(jobs.size()) >= threads) {
      auto& [label, fut] = jobs.front();
      gallery.identities[label] = fut.get();
      jobs.erase(jobs.begin());
    }
  }
  for (auto& [label, fut] : jobs) gallery.identities[label] = fut.get();
  return gallery;
}

void save_gallery(const PrototypeGallery& gallery, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  char buf[64];
  out << "facetrack-gallery v1\n";
  out << "dim " << gallery.dimension() << "\n";
  for (const auto& [label, entry] : gallery.identities) {
    out << "identity " << label << " " << entry.prototypes.size() << "\n";
    for (std::size_t i = 0; i < entry.prototypes.size(); ++i) {
      out << "proto " << entry.source_indices[i];
      for (double v : entry.prototypes[i]) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PrototypeGallery load_gallery(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gallery file: " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "facetrack-gallery v1") {
    throw std::runtime_error("not a gallery file: " + path.string());
  }
  std::string key;
  int dim = 0;
  if (!(in >> key >> dim) || key != "dim" || dim < 0) {
    throw std::runtime_error("gallery file missing dimension: " + path.string());
  }

  PrototypeGallery gallery;
  while (in >> key) {
    if (key != "identity") {
      throw std::runtime_error("gallery file: expected 'identity', got '" + key + "'");
    }
    std::string label;
    std::size_t count = 0;
    if (!(in >> label >> count)) {
      throw std::runtime_error("gallery file: malformed identity header");
    }
    PrototypeGallery::Entry entry;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t src = 0;
      if (!(in >> key >> src) || key != "proto") {
        throw std::runtime_error("gallery file: malformed prototype record for '" +
                                 label + "'");
      }
      Embedding e(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) {
        if (!(in >> e[std::size_t(j)])) {
          throw std::runtime_error("gallery file: truncated prototype vector for '" +
                                   label + "'");
        }
      }
      entry.source_indices.push_back(src);
      entry.prototypes.push_back(std::move(e));
    }
    if (entry.prototypes.empty()) {
      throw std::runtime_error("gallery file: identity '" + label + "' has no prototypes");
    }
    gallery.identities[label] = std::move(entry);
  }
  return gallery;
}

}  // namespace facetrack
