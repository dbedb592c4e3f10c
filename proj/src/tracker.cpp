#include "facetrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace facetrack {

const char* to_string(FaceSource source) {
  switch (source) {
    case FaceSource::kRecognized: return "recognized";
    case FaceSource::kReused: return "reused";
    case FaceSource::kOccluded: return "occluded";
    case FaceSource::kSkipped: return "skipped";
  }
  return "?";
}

FaceSource face_source_from_string(std::string_view name) {
  if (name == "recognized") return FaceSource::kRecognized;
  if (name == "reused") return FaceSource::kReused;
  if (name == "occluded") return FaceSource::kOccluded;
  if (name == "skipped") return FaceSource::kSkipped;
  throw std::runtime_error("unknown face source: " + std::string(name));
}

TrackerState initialize(const std::vector<FrameResult>& initial_frames,
                        const TrackerConfig& cfg) {
  TrackerState state;
  const long window = long(initial_frames.size());
  if (window == 0) return state;

  struct Tally {
    long first_frame = 0;
    long appearances = 0;
    const FaceRecord* last = nullptr;
  };
  std::map<std::string, Tally> tallies;
  for (long f = 0; f < window; ++f) {
    for (const FaceRecord& face : initial_frames[std::size_t(f)].faces) {
      if (face.label == kUnknownLabel) continue;
      auto [it, inserted] = tallies.emplace(face.label, Tally{f, 0, nullptr});
      ++it->second.appearances;
      it->second.last = &face;
    }
  }

  for (const auto& [label, tally] : tallies) {
    TrackEntry entry;
    entry.label = label;
    entry.box = tally.last->box;
    entry.landmarks = tally.last->landmarks;
    entry.last_distance = tally.last->distance;
    entry.tot_appearances = tally.appearances;
    entry.tot_frames_processed = window - tally.first_frame;
    const double ratio = double(entry.tot_appearances) / double(entry.tot_frames_processed);
    if (ratio >= cfg.promotion_ratio) {
      entry.cont_appearances = cfg.max_cont_appearances;
      state.active[label] = std::move(entry);
    } else {
      entry.cont_appearances = 0;
      state.inactive[label] = std::move(entry);
    }
  }
  return state;
}

void check_for_missing_faces(TrackerState& state, const std::set<std::string>& seen_labels,
                             const TrackerConfig& cfg, FrameResult& frame_out) {
  std::vector<std::string> demoted;
  for (auto& [label, entry] : state.active) {
    if (seen_labels.count(label)) {
      entry.cont_appearances =
          std::min(cfg.max_cont_appearances, entry.cont_appearances + 1);
      continue;
    }
    // Missed frame: decrement first, then decide occluded vs disappearing.
    entry.cont_appearances -= 1;
    if (entry.cont_appearances >= cfg.min_appearances) {
      entry.tot_appearances += 1;  // declared present at its last box
      frame_out.faces.push_back({label, entry.box, entry.landmarks, entry.last_distance,
                                 FaceSource::kOccluded});
    } else {
      demoted.push_back(label);
    }
  }
  for (const std::string& label : demoted) {
    auto node = state.active.extract(label);
    state.inactive.insert(std::move(node));
  }
}

FrameResult process_frame(TrackerState& state, long frame_index,
                          const std::vector<std::pair<Detection, Embedding>>& detections,
                          const PrototypeGallery& gallery, const TrackerConfig& cfg,
                          TrackerStats* stats) {
  // Every known face has one more processed frame on its clock.
  for (auto& [label, entry] : state.active) entry.tot_frames_processed += 1;
  for (auto& [label, entry] : state.inactive) entry.tot_frames_processed += 1;

  struct Assignment {
    std::string label;
    double distance = 0.0;
    FaceSource source = FaceSource::kRecognized;
  };
  std::vector<Assignment> assigned(detections.size());
  std::vector<bool> has_assignment(detections.size(), false);

  // Case (i): minor movement. Greedy best-IoU matching between detections
  // and active entries, each used at most once.
  struct Candidate {
    double overlap;
    std::size_t det;
    std::string label;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (const auto& [label, entry] : state.active) {
      const double overlap = iou(detections[i].first.box, entry.box);
      if (overlap >= cfg.minor_movement_iou) candidates.push_back({overlap, i, label});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.det != b.det) return a.det < b.det;
    return a.label < b.label;
  });
  std::set<std::string> reused_labels;
  for (const Candidate& c : candidates) {
    if (has_assignment[c.det] || reused_labels.count(c.label)) continue;
    assigned[c.det] = {c.label, state.active[c.label].last_distance, FaceSource::kReused};
    has_assignment[c.det] = true;
    reused_labels.insert(c.label);
  }

  // Cases (ii)/(iii): classify everything that did not match by movement.
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (has_assignment[i]) continue;
    const Classification c = classify(detections[i].second, gallery);
    if (stats) stats->classify_invocations += 1;
    assigned[i] = {c.label, c.distance, FaceSource::kRecognized};
    has_assignment[i] = true;
  }

  // Consistent-assignment check: a label may keep only its closest holder.
  {
    std::map<std::string, std::size_t> keeper;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      const Assignment& a = assigned[i];
      const auto it = keeper.find(a.label);
      if (it == keeper.end() || a.distance < assigned[it->second].distance) {
        keeper[a.label] = i;
      }
    }
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (keeper[assigned[i].label] != i) assigned[i].label = kUnknownLabel;
    }
  }

  // State updates from the surviving assignments, in detection order.
  std::set<std::string> seen;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Assignment& a = assigned[i];
    if (a.label == kUnknownLabel) continue;
    seen.insert(a.label);
    const Detection& det = detections[i].first;

    if (auto it = state.active.find(a.label); it != state.active.end()) {
      TrackEntry& entry = it->second;
      entry.box = det.box;
      entry.landmarks = det.landmarks;
      entry.tot_appearances += 1;
      if (a.source == FaceSource::kRecognized) entry.last_distance = a.distance;
      continue;
    }
    if (auto it = state.inactive.find(a.label); it != state.inactive.end()) {
      TrackEntry& entry = it->second;
      entry.box = det.box;
      entry.landmarks = det.landmarks;
      entry.tot_appearances += 1;
      entry.last_distance = a.distance;
      entry.cont_appearances =
          std::min(cfg.max_cont_appearances, entry.cont_appearances + 1);
      const double ratio =
          double(entry.tot_appearances) / double(entry.tot_frames_processed);
      if (ratio >= cfg.promotion_ratio) {
        entry.cont_appearances = cfg.max_cont_appearances;
        auto node = state.inactive.extract(it);
        state.active.insert(std::move(node));
      }
      continue;
    }
    // Possible new face: starts in the InactiveSet; promotion is checked on
    // its next detection.
    TrackEntry entry;
    entry.label = a.label;
    entry.box = det.box;
    entry.landmarks = det.landmarks;
    entry.tot_appearances = 1;
    entry.tot_frames_processed = 1;
    entry.cont_appearances = 1;
    entry.last_distance = a.distance;
    state.inactive[a.label] = std::move(entry);
  }

  FrameResult out;
  out.frame_index = frame_index;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i].first;
    out.faces.push_back(
        {assigned[i].label, det.box, det.landmarks, assigned[i].distance, assigned[i].source});
  }
  check_for_missing_faces(state, seen, cfg, out);
  return out;
}

namespace {

void validate(const TrackerConfig& cfg) {
  if (cfg.skip_frames < 0) throw std::invalid_argument("skip_frames must be >= 0");
  if (cfg.promotion_ratio <= 0.0 || cfg.promotion_ratio > 1.0) {
    throw std::invalid_argument("promotion_ratio must be in (0, 1]");
  }
  if (cfg.min_appearances > cfg.max_cont_appearances) {
    throw std::invalid_argument("min_appearances must not exceed max_cont_appearances");
  }
  if (cfg.minor_movement_iou < 0.0 || cfg.minor_movement_iou > 1.0) {
    throw std::invalid_argument("minor_movement_iou must be in [0, 1]");
  }
}

}  // namespace

ProcessOutput process_video(FrameStream& stream, const PrototypeGallery& gallery,
                            const TrackerConfig& cfg, const RecognizerConfig& rec_cfg) {
  using clock = std::chrono::steady_clock;
  validate(cfg);
  ProcessOutput out;
  out.vid.fps = stream.fps();
  const long init_window = long(std::floor(cfg.init_window_seconds * stream.fps()));

  std::vector<FrameResult> init_results;
  TrackerState state;
  bool initialized = init_window <= 0;
  long rel = 0;  // frame offset past the init window

  const auto t0 = clock::now();
  for (;;) {
    std::optional<StreamFrame> frame;
    try {
      frame = stream.next();
    } catch (const std::exception& e) {
      out.fault = e.what();
      break;
    }
    if (!frame) break;

    if (!initialized) {
      const auto kept = filter_by_area(frame->faces, rec_cfg);
      // Initial duration: detect and recognize everything at full rate.
      FrameResult fr;
      fr.frame_index = frame->frame_index;
      std::vector<RecognitionResult> recs;
      for (const auto& [det, emb] : kept) {
        const Classification c = classify(emb, gallery);
        out.stats.classify_invocations += 1;
        recs.push_back({c.label, c.distance, det.box, det.landmarks});
      }
      recs = resolve_duplicates(std::move(recs));
      for (const RecognitionResult& r : recs) {
        fr.faces.push_back({r.label, r.box, r.landmarks, r.distance,
                            FaceSource::kRecognized});
      }
      init_results.push_back(fr);
      out.vid.frames.push_back(std::move(fr));
      out.stats.frames_processed += 1;
      if (long(init_results.size()) >= init_window) {
        state = initialize(init_results, cfg);
        initialized = true;
      }
      continue;
    }

    if (cfg.skip_frames > 0 && rel % (cfg.skip_frames + 1) != 0) {
      // Skipped frame: copy the ActiveSet verbatim, no counter movement.
      FrameResult fr;
      fr.frame_index = frame->frame_index;
      for (const auto& [label, entry] : state.active) {
        fr.faces.push_back({label, entry.box, entry.landmarks, entry.last_distance,
                            FaceSource::kSkipped});
      }
      out.vid.frames.push_back(std::move(fr));
      out.stats.frames_copied += 1;
    } else {
      const auto kept = filter_by_area(frame->faces, rec_cfg);
      out.vid.frames.push_back(
          process_frame(state, frame->frame_index, kept, gallery, cfg, &out.stats));
      out.stats.frames_processed += 1;
    }
    ++rel;
  }

  // Streams shorter than the init window still yield a valid (empty) state.
  if (!initialized) state = initialize(init_results, cfg);

  out.stats.total_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  out.final_state = std::move(state);
  return out;
}

namespace {

void write_point(std::ostream& os, const Point2& p, char* buf, std::size_t n) {
  std::snprintf(buf, n, " %.9g %.9g", p.x, p.y);
  os << buf;
}

}  // namespace

void save_vid_result(const VidResult& vid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  char buf[96];
  out << "facetrack-vidresult v1\n";
  std::snprintf(buf, sizeof buf, "fps %.9g\n", vid.fps);
  out << buf;
  for (const FrameResult& fr : vid.frames) {
    out << "frame " << fr.frame_index << " " << fr.faces.size() << "\n";
    for (const FaceRecord& f : fr.faces) {
      out << "face " << f.label << " " << f.box.x << " " << f.box.y << " " << f.box.w
          << " " << f.box.h;
      write_point(out, f.landmarks.left_eye, buf, sizeof buf);
      write_point(out, f.landmarks.right_eye, buf, sizeof buf);
      write_point(out, f.landmarks.nose, buf, sizeof buf);
      write_point(out, f.landmarks.mouth_left, buf, sizeof buf);
      write_point(out, f.landmarks.mouth_right, buf, sizeof buf);
      std::snprintf(buf, sizeof buf, " %.9g ", f.distance);
      out << buf << to_string(f.source) << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

VidResult load_vid_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vidresult file: " + path.string());
  std::string header;
  std::getline(in, header);
  if (header != "facetrack-vidresult v1") {
    throw std::runtime_error("not a vidresult file: " + path.string());
  }
  VidResult vid;
  std::string key;
  if (!(in >> key >> vid.fps) || key != "fps") {
    throw std::runtime_error("vidresult file missing fps: " + path.string());
  }
  while (in >> key) {
    if (key != "frame") throw std::runtime_error("vidresult file: expected 'frame'");
    FrameResult fr;
    std::size_t count = 0;
    if (!(in >> fr.frame_index >> count)) {
      throw std::runtime_error("vidresult file: malformed frame header");
    }
    for (std::size_t i = 0; i < count; ++i) {
      FaceRecord f;
      std::string source;
      if (!(in >> key >> f.label >> f.box.x >> f.box.y >> f.box.w >> f.box.h >>
            f.landmarks.left_eye.x >> f.landmarks.left_eye.y >> f.landmarks.right_eye.x >>
            f.landmarks.right_eye.y >> f.landmarks.nose.x >> f.landmarks.nose.y >>
            f.landmarks.mouth_left.x >> f.landmarks.mouth_left.y >>
            f.landmarks.mouth_right.x >> f.landmarks.mouth_right.y >> f.distance >>
            source) ||
          key != "face") {
        throw std::runtime_error("vidresult file: malformed face record");
      }
      f.source = face_source_from_string(source);
      fr.faces.push_back(std::move(f));
    }
    vid.frames.push_back(std::move(fr));
  }
  return vid;
}

}  // namespace facetrack
