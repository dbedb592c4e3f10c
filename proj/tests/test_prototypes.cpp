#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "facetrack/harness.hpp"
#include "facetrack/prototypes.hpp"

using namespace facetrack;

namespace {

// Exhaustive optimum over all assignments for k <= 2 (oracle).
double exhaustive_best_cost(const std::vector<Embedding>& pts, int k) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts[0].size();
  auto group_cost = [&](const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    Embedding mean(dim, 0.0);
    for (std::size_t i : idx) {
      for (std::size_t j = 0; j < dim; ++j) mean[j] += pts[i][j];
    }
    for (std::size_t j = 0; j < dim; ++j) mean[j] /= double(idx.size());
    double cost = 0.0;
    for (std::size_t i : idx) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = pts[i][j] - mean[j];
        cost += d * d;
      }
    }
    return cost;
  };

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  if (k == 1) return group_cost(all);

  double best = std::numeric_limits<double>::max();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<std::size_t> g0, g1;
    for (std::size_t i = 0; i < n; ++i) {
      ((mask >> i) & 1u ? g1 : g0).push_back(i);
    }
    best = std::min(best, group_cost(g0) + group_cost(g1));
  }
  return best;
}

AlignedFace gradient_face(int offset = 0) {
  AlignedFace face;
  face.image = Image::filled(AlignedFace::kSize, AlignedFace::kSize, 1, 0);
  for (int y = 0; y < AlignedFace::kSize; ++y) {
    for (int x = 0; x < AlignedFace::kSize; ++x) {
      face.image.at(x, y) = std::uint8_t((x + 2 * y + offset) % 256);
    }
  }
  return face;
}

}  // namespace

TEST_CASE("sparse sampling keeps one sample per second") {
  CHECK(sparse_sample_indices(300, 30.0) ==
        std::vector<std::size_t>{0, 30, 60, 90, 120, 150, 180, 210, 240, 270});
  CHECK(sparse_sample_indices(1, 30.0) == std::vector<std::size_t>{0});
  CHECK(sparse_sample_indices(61, 30.0) == std::vector<std::size_t>{0, 30, 60});
}

TEST_CASE("sparse sampling matches the floor-index oracle on random inputs") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t frames = std::size_t(rng.uniform_int(1, 2000));
    const double fps = double(rng.uniform_int(1, 120));
    const auto got = sparse_sample_indices(frames, fps);

    std::vector<std::size_t> expected;
    for (std::size_t j = 0;; ++j) {
      const auto idx = std::size_t(std::floor(double(j) * fps));
      if (idx >= frames) break;
      expected.push_back(idx);
    }
    REQUIRE(got == expected);
    CHECK(got.size() == std::size_t(std::floor(double(frames - 1) / fps)) + 1);
  }
}

TEST_CASE("kmeans saturation: k equal to point count gives zero cost") {
  std::vector<Embedding> pts{{0, 0}, {1, 0}, {5, 5}, {9, 2}};
  ClusteringConfig cfg;
  cfg.k = 4;
  cfg.seed = 3;
  const KMeansResult res = kmeans(pts, cfg);
  CHECK(res.cost == doctest::Approx(0.0));
  std::set<int> used(res.assignments.begin(), res.assignments.end());
  CHECK(used.size() == 4);
}

TEST_CASE("kmeans separates two obvious 1-D clusters") {
  std::vector<Embedding> pts{{0}, {1}, {2}, {10}, {11}, {12}};
  ClusteringConfig cfg;
  cfg.k = 2;
  cfg.seed = 1;
  const KMeansResult res = kmeans(pts, cfg);
  // Clusters {0,1,2} and {10,11,12}; centroids 1 and 11 in some order.
  std::vector<double> centers{res.centroids[0][0], res.centroids[1][0]};
  std::sort(centers.begin(), centers.end());
  CHECK(centers[0] == doctest::Approx(1.0));
  CHECK(centers[1] == doctest::Approx(11.0));
  CHECK(res.assignments[0] == res.assignments[1]);
  CHECK(res.assignments[1] == res.assignments[2]);
  CHECK(res.assignments[3] == res.assignments[4]);
  CHECK(res.assignments[4] == res.assignments[5]);
  CHECK(res.assignments[0] != res.assignments[3]);
  CHECK(res.cost == doctest::Approx(exhaustive_best_cost(pts, 2)));
}

TEST_CASE("kmeans k=1 finds the mean") {
  std::vector<Embedding> pts{{0, 0}, {2, 0}};
  ClusteringConfig cfg;
  cfg.k = 1;
  const KMeansResult res = kmeans(pts, cfg);
  CHECK(res.centroids[0][0] == doctest::Approx(1.0));
  CHECK(res.centroids[0][1] == doctest::Approx(0.0));
  CHECK(res.cost == doctest::Approx(2.0));
}

TEST_CASE("kmeans rejects infeasible cluster counts") {
  std::vector<Embedding> pts{{0}, {1}};
  ClusteringConfig cfg;
  cfg.k = 3;
  CHECK_THROWS_AS(kmeans(pts, cfg), std::invalid_argument);
  cfg.k = 0;
  CHECK_THROWS_AS(kmeans(pts, cfg), std::invalid_argument);
  cfg.k = 1;
  CHECK_THROWS_AS(kmeans({}, cfg), std::invalid_argument);
}

TEST_CASE("kmeans with restarts reaches the exhaustive optimum almost always") {
  Rng rng(2024);
  int optimal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = int(rng.uniform_int(2, 8));
    const int dim = int(rng.uniform_int(1, 4));
    const int k = int(rng.uniform_int(1, 2));
    std::vector<Embedding> pts(static_cast<std::size_t>(n), Embedding(static_cast<std::size_t>(dim)));
    for (auto& p : pts) {
      for (auto& v : p) v = rng.uniform(-5, 5);
    }
    ClusteringConfig cfg;
    cfg.k = std::min(k, n);
    cfg.seed = std::uint64_t(trial);
    cfg.restarts = 10;
    const KMeansResult res = kmeans(pts, cfg);
    const double best = exhaustive_best_cost(pts, cfg.k);
    CHECK(res.cost >= best - 1e-9);
    if (res.cost <= best + 1e-9 + 1e-9 * best) ++optimal;
  }
  CHECK(optimal >= 95);
}

TEST_CASE("nearest_to_centroids picks exact members and breaks ties low") {
  const std::vector<Embedding> pts{{0, 0}, {2, 0}, {7, 7}};
  CHECK(nearest_to_centroids(pts, {{7, 7}}) == std::vector<std::size_t>{2});
  // Centroid (1,0) is equidistant from points 0 and 1: lowest index wins.
  CHECK(nearest_to_centroids(pts, {{1, 0}}) == std::vector<std::size_t>{0});

  const std::vector<Embedding> line{{0}, {1}, {2}, {10}, {11}, {12}};
  CHECK(nearest_to_centroids(line, {{1}, {11}}) == std::vector<std::size_t>{1, 4});
}

TEST_CASE("augmentation produces copies_per_image outputs, deterministically") {
  const AlignedFace face = gradient_face();
  AugmentationConfig cfg;
  cfg.seed = 5;
  Rng rng1(cfg.seed), rng2(cfg.seed);
  const auto batch1 = augment(face, cfg, rng1);
  const auto batch2 = augment(face, cfg, rng2);
  CHECK(batch1.size() == 10);
  CHECK(batch1 == batch2);

  // 10 inputs -> 100 outputs.
  Rng rng3(99);
  std::size_t total = 0;
  for (int i = 0; i < 10; ++i) total += augment(gradient_face(i), cfg, rng3).size();
  CHECK(total == 100);
}

TEST_CASE("identity augmentation parameters reproduce the input bit-exactly") {
  AugmentationConfig cfg;
  cfg.flip_threshold = -1.0;  // token is never <= -1
  cfg.rotation_min_deg = cfg.rotation_max_deg = 0.0;
  cfg.translate_min_px = cfg.translate_max_px = 0.0;
  cfg.scale_min = cfg.scale_max = 1.0;
  cfg.shear_min = cfg.shear_max = 0.0;
  cfg.copies_per_image = 3;
  const AlignedFace face = gradient_face(17);
  Rng rng(0);
  for (const AlignedFace& copy : augment(face, cfg, rng)) CHECK(copy == face);
}

TEST_CASE("augmentation samples flips near 50% and parameters within ranges") {
  AugmentationConfig cfg;
  cfg.seed = 21;
  Rng rng(cfg.seed);
  int flips = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const AugmentParams p = draw_augment_params(cfg, rng);
    if (p.flip) ++flips;
    CHECK(p.rotation_deg >= -45.0);
    CHECK(p.rotation_deg <= 45.0);
    CHECK(p.tx >= -10.0);
    CHECK(p.tx <= 10.0);
    CHECK(p.ty >= -10.0);
    CHECK(p.ty <= 10.0);
    CHECK(p.scale >= 0.8);
    CHECK(p.scale <= 1.2);
    CHECK(p.shear >= -0.1);
    CHECK(p.shear <= 0.1);
  }
  const double fraction = double(flips) / n;
  CHECK(fraction >= 0.48);
  CHECK(fraction <= 0.52);
}

namespace {

TrainingClip clip_of(const std::string& identity, int frames, double fps,
                     std::uint64_t seed) {
  TrainingClip clip;
  clip.identity = identity;
  clip.fps = fps;
  Rng rng(seed);
  for (int i = 0; i < frames; ++i) {
    Embedding e(4);
    for (auto& v : e) v = rng.uniform(-1, 1);
    clip.embeddings.push_back(std::move(e));
  }
  return clip;
}

}  // namespace

TEST_CASE("build_gallery sampling-only keeps one prototype per second") {
  const auto clips = std::vector<TrainingClip>{clip_of("Ana", 300, 30.0, 1)};
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kSamplingOnly;
  const PrototypeGallery g = build_gallery(clips, cfg);
  CHECK(g.identities.at("Ana").prototypes.size() == 10);
}

TEST_CASE("build_gallery k=1 selects the sample nearest the global mean") {
  const auto clips = std::vector<TrainingClip>{clip_of("Ben", 50, 30.0, 2)};
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kKMeansOnly;
  cfg.clustering.k = 1;
  const PrototypeGallery g = build_gallery(clips, cfg);
  REQUIRE(g.identities.at("Ben").prototypes.size() == 1);

  Embedding mean(4, 0.0);
  for (const Embedding& e : clips[0].embeddings) {
    for (std::size_t j = 0; j < 4; ++j) mean[j] += e[j];
  }
  for (auto& v : mean) v /= double(clips[0].embeddings.size());
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < clips[0].embeddings.size(); ++i) {
    const double d = distance(clips[0].embeddings[i], mean);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  CHECK(g.identities.at("Ben").prototypes[0] == clips[0].embeddings[nearest]);
}

TEST_CASE("every gallery prototype is bit-equal to a training sample") {
  const std::vector<TrainingClip> clips{clip_of("Cara", 120, 30.0, 3),
                                        clip_of("Dan", 90, 30.0, 4)};
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kSamplingThenKMeans;
  cfg.clustering.k = 2;
  const PrototypeGallery g = build_gallery(clips, cfg);
  for (const auto& [label, entry] : g.identities) {
    REQUIRE(!entry.prototypes.empty());
    const TrainingClip* clip = nullptr;
    for (const auto& c : clips) {
      if (c.identity == label) clip = &c;
    }
    REQUIRE(clip != nullptr);
    for (const Embedding& proto : entry.prototypes) {
      bool found = false;
      for (const Embedding& sample : clip->embeddings) {
        if (sample == proto) found = true;
      }
      CHECK(found);
    }
  }
}

TEST_CASE("build_gallery errors name the offending identity") {
  TrainingClip empty;
  empty.identity = "Eve";
  empty.fps = 30.0;
  GalleryBuildConfig cfg;
  CHECK_THROWS_WITH_AS(build_gallery({empty}, cfg), doctest::Contains("Eve"),
                       std::runtime_error);
}

TEST_CASE("gallery save/load round-trips exactly") {
  const std::vector<TrainingClip> clips{clip_of("Fay", 40, 10.0, 8),
                                        clip_of("Gil", 35, 10.0, 9)};
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kSamplingThenKMeans;
  cfg.clustering.k = 3;
  const PrototypeGallery g = build_gallery(clips, cfg);

  const auto path = std::filesystem::temp_directory_path() / "facetrack_gallery_test.txt";
  save_gallery(g, path);
  const PrototypeGallery loaded = load_gallery(path);
  REQUIRE(loaded.identities.size() == g.identities.size());
  for (const auto& [label, entry] : g.identities) {
    REQUIRE(loaded.identities.count(label) == 1);
    CHECK(loaded.identities.at(label).prototypes == entry.prototypes);
    CHECK(loaded.identities.at(label).source_indices == entry.source_indices);
  }
  std::filesystem::remove(path);
}

TEST_CASE("k-means-only on a large clip keeps 512 prototypes, all actual samples") {
  // ~9500 embeddings down to 512 prototypes. A light clustering budget is
  // plenty here: the contract under test is the prototype count and the
  // nearest-image selection rule, not convergence quality.
  TrainingClip clip;
  clip.identity = "Kim";
  clip.fps = 30.0;
  Rng rng(515);
  for (int i = 0; i < 9500; ++i) {
    Embedding e(16);
    for (auto& v : e) v = rng.uniform(-1, 1);
    clip.embeddings.push_back(std::move(e));
  }
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kKMeansOnly;
  cfg.clustering.k = 512;
  cfg.clustering.restarts = 1;
  cfg.clustering.max_iterations = 3;
  const PrototypeGallery g = build_gallery({clip}, cfg);
  const auto& entry = g.identities.at("Kim");
  REQUIRE(entry.prototypes.size() == 512);
  for (std::size_t i = 0; i < entry.prototypes.size(); ++i) {
    CHECK(entry.prototypes[i] == clip.embeddings[entry.source_indices[i]]);
  }
}

TEST_CASE("fast pipeline: augment x10, then sparse sample, then cluster") {
  // 30 chips at 30 fps: augmentation expands to 300, sampling keeps 10,
  // k-means selects 4 prototypes that are bit-equal to augmented samples.
  SyntheticIdentityModel model;
  model.label = "Lea";
  model.mean = Embedding(8, 0.0);
  model.intra_std = 0.1;
  TrainingClip clip;
  clip.identity = "Lea";
  clip.fps = 30.0;
  for (int i = 0; i < 30; ++i) {
    clip.faces.push_back(synthetic_face_raster(model, 0, std::uint64_t(i)));
    clip.embeddings.push_back(Embedding(8, double(i)));  // replaced after augmenting
  }

  const SyntheticBackend backend(8, 99);
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kSamplingThenKMeans;
  cfg.augment = true;
  cfg.augmentation.seed = 41;
  cfg.clustering.k = 4;
  cfg.clustering.seed = 42;
  const PrototypeGallery g = build_gallery({clip}, cfg, &backend);
  const auto& entry = g.identities.at("Lea");
  REQUIRE(entry.prototypes.size() == 4);

  // Reproduce the augmented sample set independently and confirm that every
  // prototype is the embedding of one of its members.
  AugmentationConfig acfg = cfg.augmentation;
  Rng rng(mix_seed(acfg.seed, {fnv1a("Lea")}));
  std::vector<Embedding> augmented;
  for (const AlignedFace& face : clip.faces) {
    for (const AlignedFace& copy : augment(face, acfg, rng)) {
      augmented.push_back(backend.embed(copy));
    }
  }
  REQUIRE(augmented.size() == 300);
  const auto sampled = sparse_sample_indices(augmented.size(), clip.fps);
  CHECK(sampled.size() == 10);
  for (const Embedding& proto : entry.prototypes) {
    bool found = false;
    for (std::size_t idx : sampled) {
      if (augmented[idx] == proto) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("augmenting without an embedder is a named configuration error") {
  TrainingClip clip;
  clip.identity = "Mia";
  clip.fps = 30.0;
  clip.faces.push_back(gradient_face());
  GalleryBuildConfig cfg;
  cfg.augment = true;
  CHECK_THROWS_AS(build_gallery({clip}, cfg, nullptr), std::invalid_argument);
}

TEST_CASE("parallel gallery builds agree with sequential ones") {
  const std::vector<TrainingClip> clips{clip_of("Hal", 60, 15.0, 10),
                                        clip_of("Ida", 80, 15.0, 11),
                                        clip_of("Joy", 70, 15.0, 12)};
  GalleryBuildConfig cfg;
  cfg.method = GalleryMethod::kSamplingThenKMeans;
  cfg.clustering.k = 2;
  const PrototypeGallery sequential = build_gallery(clips, cfg, nullptr, 1);
  const PrototypeGallery parallel = build_gallery(clips, cfg, nullptr, 3);
  REQUIRE(sequential.identities.size() == parallel.identities.size());
  for (const auto& [label, entry] : sequential.identities) {
    CHECK(parallel.identities.at(label).prototypes == entry.prototypes);
  }
}
