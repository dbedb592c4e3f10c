#include "facetrack/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace facetrack {

long GroundTruth::max_frame() const {
  return frames.empty() ? -1 : frames.rbegin()->first;
}

GroundTruth load_ground_truth(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw std::runtime_error("ground truth directory not found: " + directory.string());
  }
  GroundTruth gt;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() ||
        stem.find_first_not_of("0123456789") != std::string::npos) {
      continue;  // not a frame file
    }
    const long frame = std::stol(stem);

    std::ifstream in(entry.path());
    if (!in) throw std::runtime_error("cannot open: " + entry.path().string());
    std::string line;
    long line_no = 0;
    std::vector<std::pair<std::string, BBox>> faces;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      std::string label;
      BBox box;
      std::string extra;
      if (!(ls >> label >> box.x >> box.y >> box.w >> box.h) || (ls >> extra)) {
        throw std::runtime_error("malformed ground truth line (" +
                                 entry.path().string() + ":" + std::to_string(line_no) +
                                 "): expected 'label x y w h'");
      }
      faces.emplace_back(std::move(label), box);
    }
    gt.frames[frame] = std::move(faces);
  }
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& [frame, faces] : gt.frames) {
    std::ofstream out(directory / (std::to_string(frame) + ".txt"));
    if (!out) {
      throw std::runtime_error("cannot write ground truth for frame " +
                               std::to_string(frame));
    }
    for (const auto& [label, box] : faces) {
      out << label << " " << box.x << " " << box.y << " " << box.w << " " << box.h
          << "\n";
    }
  }
}

ScoreReport score(const VidResult& vid, const GroundTruth& gt, double iou_threshold) {
  ScoreReport report;

  std::map<long, const FrameResult*> by_frame;
  for (const FrameResult& fr : vid.frames) by_frame[fr.frame_index] = &fr;

  std::set<std::string> gt_labels;
  for (const auto& [frame, faces] : gt.frames) {
    for (const auto& [label, box] : faces) gt_labels.insert(label);
  }

  for (const auto& [frame, faces] : gt.frames) {
    for (const auto& [label, gt_box] : faces) {
      if (label == kUnknownLabel) continue;  // the open-set label is never scored
      report.label_gt_frames[label] += 1;
      const auto it = by_frame.find(frame);
      if (it == by_frame.end()) continue;
      bool matched = false;
      for (const FaceRecord& face : it->second->faces) {
        if (face.label == label && iou(face.box, gt_box) >= iou_threshold) {
          matched = true;
          break;
        }
      }
      if (matched) report.label_matched_frames[label] += 1;
    }
  }

  double sum = 0.0;
  for (const auto& [label, gt_count] : report.label_gt_frames) {
    const long matched = report.label_matched_frames[label];
    const double acc = gt_count > 0 ? double(matched) / double(gt_count) : 0.0;
    report.per_label_accuracy[label] = acc;
    sum += acc;
  }
  report.average_accuracy =
      report.label_gt_frames.empty() ? 0.0 : sum / double(report.label_gt_frames.size());
  report.frames_scored = long(gt.frames.size());

  std::set<std::string> emitted;
  for (const FrameResult& fr : vid.frames) {
    for (const FaceRecord& face : fr.faces) {
      if (face.label != kUnknownLabel) emitted.insert(face.label);
    }
  }
  for (const std::string& label : emitted) {
    if (!gt_labels.count(label)) report.spurious_labels.push_back(label);
  }
  return report;
}

TimingReport timing_report(double baseline_sec_per_frame, double candidate_sec_per_frame) {
  if (baseline_sec_per_frame <= 0.0 || candidate_sec_per_frame <= 0.0) {
    throw std::invalid_argument("timing_report: rates must be positive");
  }
  TimingReport r;
  r.baseline_sec_per_frame = baseline_sec_per_frame;
  r.candidate_sec_per_frame = candidate_sec_per_frame;
  r.speedup = baseline_sec_per_frame / candidate_sec_per_frame;
  return r;
}

}  // namespace facetrack
