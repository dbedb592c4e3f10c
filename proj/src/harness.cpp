#include "facetrack/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "facetrack/rng.hpp"

namespace facetrack {

namespace {

constexpr std::uint64_t kStreamSalt = 0x73747265616dull;  // test-time noise
constexpr std::uint64_t kTrainSalt = 0x747261696eull;     // training-time noise

bool in_interval(long f, long start, long end) { return f >= start && f <= end; }

const OcclusionInterval* occlusion_at(const IdentityScript& script, long frame) {
  for (const OcclusionInterval& occ : script.occlusions) {
    if (in_interval(frame, occ.start, occ.end)) return &occ;
  }
  return nullptr;
}

}  // namespace

BBox box_at(const IdentityScript& script, long frame) {
  if (script.path.empty()) throw std::invalid_argument("identity path is empty");
  if (script.path.size() == 1 || frame <= script.path.front().first) {
    return script.path.front().second;
  }
  for (std::size_t i = 1; i < script.path.size(); ++i) {
    const auto& [f0, b0] = script.path[i - 1];
    const auto& [f1, b1] = script.path[i];
    if (frame <= f1) {
      const double t = f1 == f0 ? 0.0 : double(frame - f0) / double(f1 - f0);
      auto lerp = [t](int a, int b) { return int(std::lround(a + t * (b - a))); };
      return {lerp(b0.x, b1.x), lerp(b0.y, b1.y), lerp(b0.w, b1.w), lerp(b0.h, b1.h)};
    }
  }
  return script.path.back().second;
}

Landmarks5 landmarks_for_box(const BBox& box) {
  Landmarks5 lm;
  lm.left_eye = {box.x + 0.3 * box.w, box.y + 0.35 * box.h};
  lm.right_eye = {box.x + 0.7 * box.w, box.y + 0.35 * box.h};
  lm.nose = {box.x + 0.5 * box.w, box.y + 0.55 * box.h};
  lm.mouth_left = {box.x + 0.35 * box.w, box.y + 0.75 * box.h};
  lm.mouth_right = {box.x + 0.65 * box.w, box.y + 0.75 * box.h};
  return lm;
}

void ScenarioSpec::validate(long long max_background_area) const {
  std::vector<std::string> problems;
  if (fps <= 0.0) problems.push_back("fps must be positive");
  if (total_frames <= 0) problems.push_back("total_frames must be positive");

  for (const IdentityScript& id : identities) {
    const std::string& name = id.model.label;
    if (name.empty()) problems.push_back("identity with empty label");
    if (id.model.mean.empty()) problems.push_back(name + ": empty embedding mean");
    if (id.model.intra_std <= 0.0) problems.push_back(name + ": intra_std must be > 0");
    if (id.entry_frame > id.exit_frame) {
      problems.push_back(name + ": entry_frame > exit_frame");
    }
    if (id.exit_frame >= total_frames) {
      problems.push_back(name + ": exit_frame beyond total_frames");
    }
    if (id.path.empty()) problems.push_back(name + ": empty motion path");
    for (const OcclusionInterval& occ : id.occlusions) {
      if (occ.start > occ.end || occ.start < id.entry_frame || occ.end > id.exit_frame) {
        problems.push_back(name + ": occlusion interval outside presence span");
      }
    }
  }
  for (std::size_t i = 0; i < background.size(); ++i) {
    if (background[i].box.area() >= max_background_area) {
      problems.push_back("background face " + std::to_string(i) +
                         " is not below the area threshold");
    }
    if (background[i].mean.empty()) {
      problems.push_back("background face " + std::to_string(i) + " has empty mean");
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
}

SyntheticStream generate(const ScenarioSpec& spec) {
  spec.validate();
  SyntheticStream stream;
  stream.fps = spec.fps;
  stream.frames.reserve(std::size_t(spec.total_frames));

  for (long f = 0; f < spec.total_frames; ++f) {
    StreamFrame frame;
    frame.frame_index = f;
    std::vector<std::pair<std::string, BBox>> gt_faces;

    for (std::size_t i = 0; i < spec.identities.size(); ++i) {
      const IdentityScript& id = spec.identities[i];
      if (!in_interval(f, id.entry_frame, id.exit_frame)) continue;
      const BBox box = box_at(id, f);
      const OcclusionInterval* occ = occlusion_at(id, f);
      if (occ == nullptr) {
        Detection det;
        det.frame_index = f;
        det.box = box;
        det.landmarks = landmarks_for_box(box);
        det.confidence = 1.0;
        const int pose = id.model.pose_seeds.empty()
                             ? 0
                             : int(std::uint64_t(f) % id.model.pose_seeds.size());
        frame.faces.emplace_back(
            det, synthetic_embed(id.model, pose,
                                 mix_seed(spec.seed,
                                          {kStreamSalt, std::uint64_t(i), std::uint64_t(f)})));
        gt_faces.emplace_back(id.model.label, box);
      } else if (occ->partial) {
        // Detector misses the face but the person is still visibly there.
        gt_faces.emplace_back(id.model.label, box);
      }
    }

    for (std::size_t b = 0; b < spec.background.size(); ++b) {
      const BackgroundFace& bg = spec.background[b];
      const long exit = bg.exit_frame > 0 ? bg.exit_frame : spec.total_frames - 1;
      if (!in_interval(f, bg.entry_frame, exit)) continue;
      Detection det;
      det.frame_index = f;
      det.box = bg.box;
      det.landmarks = landmarks_for_box(bg.box);
      det.confidence = 0.9;
      SyntheticIdentityModel ghost;
      ghost.label = "__background_" + std::to_string(b);
      ghost.mean = bg.mean;
      ghost.intra_std = bg.intra_std;
      frame.faces.emplace_back(
          det, synthetic_embed(ghost, 0,
                               mix_seed(spec.seed, {kStreamSalt, 0xb6ull,
                                                    std::uint64_t(b), std::uint64_t(f)})));
    }

    stream.frames.push_back(std::move(frame));
    if (!gt_faces.empty()) stream.ground_truth.frames[f] = std::move(gt_faces);
  }
  return stream;
}

AlignedFace synthetic_face_raster(const SyntheticIdentityModel& model, int pose_index,
                                  std::uint64_t seed) {
  const int n = AlignedFace::kSize;
  AlignedFace face;
  face.image = Image::filled(n, n, 1, 0);

  // Identity texture: a few smooth seeded waves, so augmented (warped)
  // copies stay visually close to each other while identities differ.
  Rng id_rng(mix_seed(fnv1a(model.label), {0x7465787475726555ull}));
  const double ax = id_rng.uniform(1.0, 4.0), ay = id_rng.uniform(1.0, 4.0);
  const double bx = id_rng.uniform(4.0, 9.0), by = id_rng.uniform(4.0, 9.0);
  const double p1 = id_rng.uniform(0.0, 6.28), p2 = id_rng.uniform(0.0, 6.28);
  const double pose_phase = 0.35 * pose_index;

  Rng noise(mix_seed(seed, {0x726173746572ull}));
  const double jitter = noise.uniform(-0.15, 0.15);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = double(x) / n, v = double(y) / n;
      double val = 128.0;
      val += 56.0 * std::sin(6.28318 * (ax * u + ay * v) + p1 + pose_phase);
      val += 36.0 * std::sin(6.28318 * (bx * u + by * v) + p2 + jitter);
      face.image.at(x, y) =
          std::uint8_t(std::lround(std::min(255.0, std::max(0.0, val))));
    }
  }
  return face;
}

std::vector<TrainingClip> training_clips_from(const ScenarioSpec& spec,
                                              int frames_per_identity) {
  spec.validate();
  if (frames_per_identity < 1) {
    throw std::invalid_argument("frames_per_identity must be >= 1");
  }
  std::vector<TrainingClip> clips;
  for (std::size_t i = 0; i < spec.identities.size(); ++i) {
    const IdentityScript& id = spec.identities[i];
    TrainingClip clip;
    clip.identity = id.model.label;
    clip.fps = spec.fps;
    for (int j = 0; j < frames_per_identity; ++j) {
      const int pose = id.model.pose_seeds.empty()
                           ? 0
                           : int(std::uint64_t(j) % id.model.pose_seeds.size());
      const std::uint64_t sample_seed =
          mix_seed(spec.seed, {kTrainSalt, std::uint64_t(i), std::uint64_t(j)});
      clip.embeddings.push_back(synthetic_embed(id.model, pose, sample_seed));
      clip.faces.push_back(synthetic_face_raster(id.model, pose, sample_seed));
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

ScenarioSpec make_grid_scenario(int identity_count, double separation, long total_frames,
                                double fps, std::uint64_t seed, int dimension) {
  if (identity_count < 1) throw std::invalid_argument("identity_count must be >= 1");
  if (dimension < identity_count) {
    throw std::invalid_argument("dimension must be >= identity_count for grid means");
  }
  ScenarioSpec spec;
  spec.fps = fps;
  spec.total_frames = total_frames;
  spec.seed = seed;

  const double intra_std = 0.05;
  // Orthogonal unit directions scaled so pairwise mean distance is
  // separation * intra_std.
  const double scale = separation * intra_std / std::sqrt(2.0);
  for (int i = 0; i < identity_count; ++i) {
    IdentityScript id;
    id.model.label = "Person" + std::string(1, char('A' + i % 26)) +
                     (i >= 26 ? std::to_string(i / 26) : "");
    id.model.mean.assign(std::size_t(dimension), 0.0);
    id.model.mean[std::size_t(i)] = scale;
    id.model.intra_std = intra_std;
    id.entry_frame = 0;
    id.exit_frame = total_frames - 1;
    const int col = i % 4;
    const int row = i / 4;
    id.path = {{0, BBox{80 + col * 200, 80 + row * 200, 60, 60}}};
    spec.identities.push_back(std::move(id));
  }
  return spec;
}

void add_background_faces(ScenarioSpec& spec, int count, long long max_area) {
  const int dim = spec.identities.empty() ? 16 : int(spec.identities[0].model.mean.size());
  const int side = int(std::floor(std::sqrt(double(max_area - 1))));
  Rng rng(mix_seed(spec.seed, {0xb66ull}));
  for (int b = 0; b < count; ++b) {
    BackgroundFace bg;
    bg.box = {900 + (b % 4) * 50, 600 + (b / 4) * 50, side, side};
    bg.mean.assign(std::size_t(dim), 0.0);
    // Far from every gallery identity.
    for (int j = 0; j < dim; ++j) bg.mean[std::size_t(j)] = 5.0 + rng.uniform();
    bg.entry_frame = 0;
    bg.exit_frame = spec.total_frames - 1;
    spec.background.push_back(std::move(bg));
  }
}

namespace {

nlohmann::json box_to_json(const BBox& b) {
  return nlohmann::json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

BBox box_from_json(const nlohmann::json& j) {
  return BBox{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(),
              j.at("h").get<int>()};
}

}  // namespace

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["fps"] = spec.fps;
  doc["total_frames"] = spec.total_frames;
  doc["seed"] = spec.seed;
  doc["identities"] = nlohmann::json::array();
  for (const IdentityScript& id : spec.identities) {
    nlohmann::json j;
    j["label"] = id.model.label;
    j["mean"] = id.model.mean;
    j["intra_std"] = id.model.intra_std;
    j["pose_seeds"] = id.model.pose_seeds;
    j["pose_scale"] = id.model.pose_scale;
    j["entry_frame"] = id.entry_frame;
    j["exit_frame"] = id.exit_frame;
    j["path"] = nlohmann::json::array();
    for (const auto& [frame, box] : id.path) {
      j["path"].push_back({{"frame", frame}, {"box", box_to_json(box)}});
    }
    j["occlusions"] = nlohmann::json::array();
    for (const OcclusionInterval& occ : id.occlusions) {
      j["occlusions"].push_back(
          {{"start", occ.start}, {"end", occ.end}, {"partial", occ.partial}});
    }
    doc["identities"].push_back(std::move(j));
  }
  doc["background"] = nlohmann::json::array();
  for (const BackgroundFace& bg : spec.background) {
    doc["background"].push_back({{"box", box_to_json(bg.box)},
                                 {"mean", bg.mean},
                                 {"intra_std", bg.intra_std},
                                 {"entry_frame", bg.entry_frame},
                                 {"exit_frame", bg.exit_frame}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << doc.dump(2) << "\n";
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("scenario file is not valid JSON (" + path.string() +
                             "): " + e.what());
  }
  ScenarioSpec spec;
  try {
    spec.fps = doc.at("fps").get<double>();
    spec.total_frames = doc.at("total_frames").get<long>();
    spec.seed = doc.value("seed", std::uint64_t(0));
    for (const auto& j : doc.at("identities")) {
      IdentityScript id;
      id.model.label = j.at("label").get<std::string>();
      id.model.mean = j.at("mean").get<Embedding>();
      id.model.intra_std = j.at("intra_std").get<double>();
      id.model.pose_seeds = j.value("pose_seeds", std::vector<std::uint64_t>{});
      id.model.pose_scale = j.value("pose_scale", 1.0);
      id.entry_frame = j.at("entry_frame").get<long>();
      id.exit_frame = j.at("exit_frame").get<long>();
      for (const auto& p : j.at("path")) {
        id.path.emplace_back(p.at("frame").get<long>(), box_from_json(p.at("box")));
      }
      for (const auto& o : j.value("occlusions", nlohmann::json::array())) {
        id.occlusions.push_back({o.at("start").get<long>(), o.at("end").get<long>(),
                                 o.value("partial", true)});
      }
      spec.identities.push_back(std::move(id));
    }
    for (const auto& j : doc.value("background", nlohmann::json::array())) {
      BackgroundFace bg;
      bg.box = box_from_json(j.at("box"));
      bg.mean = j.at("mean").get<Embedding>();
      bg.intra_std = j.value("intra_std", 0.05);
      bg.entry_frame = j.value("entry_frame", 0L);
      bg.exit_frame = j.value("exit_frame", 0L);
      spec.background.push_back(std::move(bg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("scenario file is missing fields (" + path.string() +
                             "): " + e.what());
  }
  return spec;
}

void save_stream(const SyntheticStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  char buf[96];
  int dim = 0;
  for (const StreamFrame& f : stream.frames) {
    if (!f.faces.empty()) {
      dim = int(f.faces.front().second.size());
      break;
    }
  }
  out << "facetrack-stream v1\n";
  std::snprintf(buf, sizeof buf, "fps %.9g\n", stream.fps);
  out << buf;
  out << "dim " << dim << "\n";
  for (const StreamFrame& f : stream.frames) {
    out << "frame " << f.frame_index << " " << f.faces.size() << "\n";
    for (const auto& [det, emb] : f.faces) {
      out << "det " << det.box.x << " " << det.box.y << " " << det.box.w << " "
          << det.box.h;
      const Landmarks5& lm = det.landmarks;
      for (const Point2& p : {lm.left_eye, lm.right_eye, lm.nose, lm.mouth_left,
                              lm.mouth_right}) {
        std::snprintf(buf, sizeof buf, " %.9g %.9g", p.x, p.y);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, " %.9g\n", det.confidence);
      out << buf;
      out << "emb";
      for (double v : emb) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SyntheticStream load_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file: " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "facetrack-stream v1") {
    throw std::runtime_error("not a stream file: " + path.string());
  }
  SyntheticStream stream;
  std::string key;
  int dim = 0;
  if (!(in >> key >> stream.fps) || key != "fps") {
    throw std::runtime_error("stream file missing fps: " + path.string());
  }
  if (!(in >> key >> dim) || key != "dim") {
    throw std::runtime_error("stream file missing dim: " + path.string());
  }
  while (in >> key) {
    if (key != "frame") throw std::runtime_error("stream file: expected 'frame'");
    StreamFrame frame;
    std::size_t count = 0;
    if (!(in >> frame.frame_index >> count)) {
      throw std::runtime_error("stream file: malformed frame header");
    }
    for (std::size_t i = 0; i < count; ++i) {
      Detection det;
      det.frame_index = frame.frame_index;
      Landmarks5& lm = det.landmarks;
      if (!(in >> key >> det.box.x >> det.box.y >> det.box.w >> det.box.h >>
            lm.left_eye.x >> lm.left_eye.y >> lm.right_eye.x >> lm.right_eye.y >>
            lm.nose.x >> lm.nose.y >> lm.mouth_left.x >> lm.mouth_left.y >>
            lm.mouth_right.x >> lm.mouth_right.y >> det.confidence) ||
          key != "det") {
        throw std::runtime_error("stream file: malformed detection record");
      }
      Embedding emb(static_cast<std::size_t>(dim));
      if (!(in >> key) || key != "emb") {
        throw std::runtime_error("stream file: missing embedding record");
      }
      for (int j = 0; j < dim; ++j) {
        if (!(in >> emb[std::size_t(j)])) {
          throw std::runtime_error("stream file: truncated embedding");
        }
      }
      frame.faces.emplace_back(std::move(det), std::move(emb));
    }
    stream.frames.push_back(std::move(frame));
  }
  return stream;
}

}  // namespace facetrack
