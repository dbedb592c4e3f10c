#include "facetrack/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace facetrack {

BBox eye_box(const Landmarks5& lm_in, int frame_width, int frame_height,
             const EyeBoxConfig& cfg) {
  const Landmarks5 lm = lm_in.canonical();
  const double dx = lm.right_eye.x - lm.left_eye.x;
  const double dy = lm.right_eye.y - lm.left_eye.y;
  const double iod = std::hypot(dx, dy);
  const double cx = (lm.left_eye.x + lm.right_eye.x) / 2.0;
  const double cy = (lm.left_eye.y + lm.right_eye.y) / 2.0;

  // The multipliers size the box for the usual near-horizontal eye line;
  // the span terms keep both eyes covered for any orientation.
  double w = std::max(cfg.width_factor * iod, std::abs(dx) + 4.0);
  double h = std::max(cfg.height_factor * iod, std::abs(dy) + 4.0);
  if (w < cfg.min_width) w = cfg.min_width;
  if (h < cfg.min_height) h = cfg.min_height;

  int x0 = int(std::floor(cx - w / 2.0));
  int y0 = int(std::floor(cy - h / 2.0));
  int x1 = int(std::ceil(cx + w / 2.0));
  int y1 = int(std::ceil(cy + h / 2.0));

  // Clamp to the frame; eyes inside the frame stay inside the box.
  x0 = std::max(0, x0);
  y0 = std::max(0, y0);
  x1 = std::min(frame_width, x1);
  y1 = std::min(frame_height, y1);
  if (x1 <= x0) x1 = std::min(frame_width, x0 + 1);
  if (y1 <= y0) y1 = std::min(frame_height, y0 + 1);
  return {x0, y0, x1 - x0, y1 - y0};
}

void redact_frame(Image& frame, const std::vector<Landmarks5>& faces,
                  const EyeBoxConfig& cfg) {
  for (const Landmarks5& lm : faces) {
    const BBox box = eye_box(lm, frame.width, frame.height, cfg);
    for (int y = box.y; y < box.bottom(); ++y) {
      for (int x = box.x; x < box.right(); ++x) {
        for (int c = 0; c < frame.channels; ++c) frame.at(x, y, c) = 0;
      }
    }
  }
}

void redact_frame(Image& frame, const std::vector<RecognitionResult>& faces,
                  const EyeBoxConfig& cfg) {
  std::vector<Landmarks5> lms;
  lms.reserve(faces.size());
  for (const RecognitionResult& r : faces) lms.push_back(r.landmarks);
  redact_frame(frame, lms, cfg);
}

ParticipationMap participation_map(const VidResult& vid, double gap_merge_seconds) {
  ParticipationMap map;
  map.fps = vid.fps;

  std::map<std::string, std::vector<long>> presence;
  long max_frame = -1;
  for (const FrameResult& fr : vid.frames) {
    max_frame = std::max(max_frame, fr.frame_index);
    for (const FaceRecord& face : fr.faces) {
      if (face.label == kUnknownLabel) continue;
      auto& frames = presence[face.label];
      if (frames.empty() || frames.back() != fr.frame_index) {
        frames.push_back(fr.frame_index);
      }
    }
  }
  map.total_frames = max_frame + 1;

  for (auto& [label, frames] : presence) {
    std::sort(frames.begin(), frames.end());
    std::vector<PresenceInterval> runs;
    for (long f : frames) {
      if (!runs.empty() && f == runs.back().end_frame + 1) {
        runs.back().end_frame = f;
      } else {
        runs.push_back({f, f});
      }
    }
    if (gap_merge_seconds > 0.0 && map.fps > 0.0) {
      std::vector<PresenceInterval> merged;
      for (const PresenceInterval& run : runs) {
        if (!merged.empty() &&
            double(run.start_frame - merged.back().end_frame) / map.fps <
                gap_merge_seconds) {
          merged.back().end_frame = run.end_frame;
        } else {
          merged.push_back(run);
        }
      }
      runs = std::move(merged);
    }
    map.rows[label] = std::move(runs);
  }
  return map;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string substitute(std::string tpl, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = tpl.find(key, pos)) != std::string::npos) {
    tpl.replace(pos, key.size(), value);
    pos += value.size();
  }
  return tpl;
}

}  // namespace

std::string participation_svg(const ParticipationMap& map, const std::string& url_template) {
  constexpr int kRowHeight = 24;
  constexpr int kRowGap = 8;
  constexpr int kLabelWidth = 160;
  constexpr double kPxPerSecond = 20.0;
  constexpr int kMargin = 10;
  constexpr int kAxisHeight = 20;

  const double total_seconds =
      map.fps > 0.0 ? double(map.total_frames) / map.fps : double(map.total_frames);
  const int plot_w = std::max(1, int(std::ceil(total_seconds * kPxPerSecond)));
  const int width = kLabelWidth + plot_w + 2 * kMargin;
  const int height =
      kMargin * 2 + kAxisHeight + int(map.rows.size()) * (kRowHeight + kRowGap);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" "
         "xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Time axis in seconds.
  const int axis_y = kMargin + kAxisHeight - 6;
  svg << "  <line x1=\"" << kLabelWidth << "\" y1=\"" << axis_y << "\" x2=\""
      << kLabelWidth + plot_w << "\" y2=\"" << axis_y
      << "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
  const double tick_step = total_seconds > 60.0 ? 10.0 : 1.0;
  char buf[64];
  for (double t = 0.0; t <= total_seconds + 1e-9; t += tick_step) {
    const int x = kLabelWidth + int(std::lround(t * kPxPerSecond));
    svg << "  <line x1=\"" << x << "\" y1=\"" << axis_y - 3 << "\" x2=\"" << x
        << "\" y2=\"" << axis_y + 3 << "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    std::snprintf(buf, sizeof buf, "%g", t);
    svg << "  <text x=\"" << x << "\" y=\"" << axis_y - 6
        << "\" font-size=\"9\" text-anchor=\"middle\" fill=\"#555555\">" << buf
        << "s</text>\n";
  }

  int row = 0;
  for (const auto& [label, intervals] : map.rows) {
    const int y = kMargin + kAxisHeight + row * (kRowHeight + kRowGap);
    const double first_time =
        intervals.empty() || map.fps <= 0.0
            ? 0.0
            : double(intervals.front().start_frame) / map.fps;

    std::ostringstream rowbuf;
    rowbuf << "  <text x=\"" << kMargin << "\" y=\"" << y + kRowHeight / 2 + 4
           << "\" font-size=\"12\" fill=\"#222222\">" << xml_escape(label)
           << "</text>\n";
    for (const PresenceInterval& iv : intervals) {
      const double t0 = map.fps > 0.0 ? double(iv.start_frame) / map.fps : 0.0;
      const double t1 =
          map.fps > 0.0 ? double(iv.end_frame + 1) / map.fps : double(iv.end_frame + 1);
      const int x = kLabelWidth + int(std::lround(t0 * kPxPerSecond));
      const int w = std::max(1, int(std::lround((t1 - t0) * kPxPerSecond)));
      rowbuf << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
             << "\" height=\"" << kRowHeight << "\" fill=\"#1f77b4\"/>\n";
    }

    if (!url_template.empty()) {
      std::snprintf(buf, sizeof buf, "%.2f", first_time);
      std::string url = substitute(url_template, "{label}", label);
      url = substitute(url, "{time}", buf);
      svg << "  <a xlink:href=\"" << xml_escape(url) << "\">\n"
          << rowbuf.str() << "  </a>\n";
    } else {
      svg << rowbuf.str();
    }
    ++row;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace facetrack
