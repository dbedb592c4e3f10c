// facetrack — open-set video identity recognition over detection streams:
// prototype-gallery construction, Active/Inactive tracking with occlusion
// tolerance and frame skipping, scoring, Pareto parameter sweeps, DeID
// redaction and participation maps.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facetrack/embedding.hpp"
#include "facetrack/evaluation.hpp"
#include "facetrack/harness.hpp"
#include "facetrack/optimizer.hpp"
#include "facetrack/prototypes.hpp"
#include "facetrack/recognizer.hpp"
#include "facetrack/reporting.hpp"
#include "facetrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace facetrack;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 1;
};

void save_stats(const TrackerStats& stats, const fs::path& path) {
  nlohmann::json doc;
  doc["classify_invocations"] = stats.classify_invocations;
  doc["frames_processed"] = stats.frames_processed;
  doc["frames_copied"] = stats.frames_copied;
  doc["total_seconds"] = stats.total_seconds;
  doc["seconds_per_frame"] = stats.seconds_per_frame();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << doc.dump(2) << "\n";
}

ScenarioSpec scenario_from_options(const std::string& scenario_file, int identities,
                                   long frames, double fps, double separation, int dim,
                                   int background, std::uint64_t seed, bool seed_given) {
  ScenarioSpec spec;
  if (!scenario_file.empty()) {
    spec = load_scenario(scenario_file);
    if (seed_given) spec.seed = seed;
  } else {
    spec = make_grid_scenario(identities, separation, frames, fps, seed, dim);
    if (background > 0) add_background_faces(spec, background);
  }
  spec.validate();
  return spec;
}

ProcessOutput recognize_stream(const SyntheticStream& stream, const PrototypeGallery& gallery,
                               const TrackerConfig& tcfg, const RecognizerConfig& rcfg) {
  VectorStream vs(stream.fps, stream.frames);
  return process_video(vs, gallery, tcfg, rcfg);
}

int run(int argc, char** argv) {
  CLI::App app{"facetrack: open-set video identity recognition toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may appear after the subcommand
  app.set_config("--config", "", "TOML config file; command-line flags win");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Global seed for every stochastic stage")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker cap for parallel stages")
      ->capture_default_str();

  // ---- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic detection stream + ground truth");
  std::string sim_scenario, sim_out_stream, sim_out_gt, sim_out_scenario;
  int sim_identities = 4, sim_background = 4, sim_dim = 16;
  long sim_frames = 300;
  double sim_fps = 30.0, sim_separation = 5.0;
  sim->add_option("--scenario", sim_scenario, "Scenario JSON (otherwise a grid scenario is built)");
  sim->add_option("--out-stream", sim_out_stream, "Stream output file")->required();
  sim->add_option("--out-gt", sim_out_gt, "Ground-truth output directory")->required();
  sim->add_option("--out-scenario", sim_out_scenario, "Write the effective scenario JSON here");
  sim->add_option("--identities", sim_identities)->capture_default_str();
  sim->add_option("--background", sim_background, "Small-area distractor count")->capture_default_str();
  sim->add_option("--frames", sim_frames)->capture_default_str();
  sim->add_option("--fps", sim_fps)->capture_default_str();
  sim->add_option("--separation", sim_separation, "Inter-mean distance / intra-std ratio")->capture_default_str();
  sim->add_option("--dim", sim_dim, "Embedding dimension")->capture_default_str();

  // ---- build-gallery -----------------------------------------------------
  auto* build = app.add_subcommand("build-gallery", "Build per-identity face prototypes from training clips");
  std::string b_scenario, b_method = "sampling", b_out, b_backend = "synthetic";
  int b_frames_per_identity = 300, b_k = 16, b_restarts = 10;
  bool b_augment = false;
  build->add_option("--scenario", b_scenario, "Scenario JSON providing training identities")->required();
  build->add_option("--frames-per-identity", b_frames_per_identity)->capture_default_str();
  build->add_option("--method", b_method, "sampling | kmeans | sampling+kmeans")->capture_default_str();
  build->add_flag("--augment", b_augment, "10x augmentation before sampling/clustering");
  build->add_option("--backend", b_backend, "Embedder backend for augmented chips")->capture_default_str();
  build->add_option("--k", b_k, "Cluster count for k-means methods")->capture_default_str();
  build->add_option("--restarts", b_restarts)->capture_default_str();
  build->add_option("--out", b_out, "Gallery output file")->required();

  // ---- recognize ---------------------------------------------------------
  auto* rec = app.add_subcommand("recognize", "Run video face recognition over a stream");
  std::string r_gallery, r_stream, r_out, r_stats, r_deid_dir;
  int r_skip = 0, r_frame_w = 1920, r_frame_h = 1080;
  long long r_min_area = 2500;
  double r_init_seconds = 2.0;
  rec->add_option("--gallery", r_gallery, "Gallery file from build-gallery")->required();
  rec->add_option("--stream", r_stream, "Stream file from simulate")->required();
  rec->add_option("--out", r_out, "VidResult output file")->required();
  rec->add_option("--skip", r_skip, "Frames skipped after each processed frame")->capture_default_str();
  rec->add_option("--min-face-area", r_min_area, "Out-of-group rejection area (px^2)")->capture_default_str();
  rec->add_option("--init-seconds", r_init_seconds, "Full-rate initialization window")->capture_default_str();
  rec->add_option("--stats", r_stats, "Write timing/classify stats JSON here");
  rec->add_option("--deid-dir", r_deid_dir, "Also write DeID-redacted frames (PGM) here");
  rec->add_option("--frame-width", r_frame_w)->capture_default_str();
  rec->add_option("--frame-height", r_frame_h)->capture_default_str();

  // ---- evaluate ----------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Score a VidResult against ground truth");
  std::string e_vidresult, e_gt, e_stats, e_out;
  double e_iou = 0.5, e_baseline_spf = 0.0;
  ev->add_option("--vidresult", e_vidresult)->required();
  ev->add_option("--gt", e_gt, "Ground-truth directory")->required();
  ev->add_option("--iou", e_iou, "Match threshold")->capture_default_str();
  ev->add_option("--stats", e_stats, "Stats JSON from recognize (adds sec/frame)");
  ev->add_option("--baseline-spf", e_baseline_spf, "Baseline sec/frame for a speedup line");
  ev->add_option("--out", e_out, "Write the report as JSON here");

  // ---- sweep -------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "Sweep cluster count or skip rate and pick by Pareto front");
  std::string s_axis = "clusters", s_scenario, s_values, s_csv, s_json, s_method = "sampling+kmeans";
  int s_frames_per_identity = 300, s_skip_for_clusters = 0, s_k_for_skip = 16;
  long long s_min_area = 2500;
  sw->add_option("--axis", s_axis, "clusters | skip")->capture_default_str();
  sw->add_option("--scenario", s_scenario, "Scenario JSON")->required();
  sw->add_option("--values", s_values, "Comma-separated axis values (defaults: log2 grid / {0,5,10,15,20,30,60})");
  sw->add_option("--method", s_method, "Gallery method for cluster sweeps")->capture_default_str();
  sw->add_option("--frames-per-identity", s_frames_per_identity)->capture_default_str();
  sw->add_option("--skip", s_skip_for_clusters, "Skip rate used during cluster sweeps")->capture_default_str();
  sw->add_option("--k", s_k_for_skip, "Cluster count used during skip sweeps")->capture_default_str();
  sw->add_option("--min-face-area", s_min_area)->capture_default_str();
  sw->add_option("--out-csv", s_csv);
  sw->add_option("--out-json", s_json);

  // ---- participation -----------------------------------------------------
  auto* part = app.add_subcommand("participation", "Render a participation map SVG from a VidResult");
  std::string p_vidresult, p_out, p_url;
  double p_gap = 1.0;
  part->add_option("--vidresult", p_vidresult)->required();
  part->add_option("--out", p_out, "SVG output file")->required();
  part->add_option("--url-template", p_url, "Per-row link; {label} and {time} are substituted");
  part->add_option("--gap-merge", p_gap, "Merge presence gaps shorter than this (seconds)")->capture_default_str();

  // ---- deid --------------------------------------------------------------
  auto* de = app.add_subcommand("deid", "Write frames with eye regions blacked out");
  std::string d_vidresult, d_out_dir, d_frames_dir;
  int d_frame_w = 1920, d_frame_h = 1080;
  long d_limit = -1;
  de->add_option("--vidresult", d_vidresult)->required();
  de->add_option("--out-dir", d_out_dir)->required();
  de->add_option("--frames-dir", d_frames_dir, "Source frames ({N}.pgm/.ppm); otherwise flat gray frames");
  de->add_option("--frame-width", d_frame_w)->capture_default_str();
  de->add_option("--frame-height", d_frame_h)->capture_default_str();
  de->add_option("--limit", d_limit, "Only write the first N frames")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help text or the usage error
    return code == 0 ? 0 : 1;
  }
  const bool seed_given = app.count("--seed") > 0;

  if (*sim) {
    ScenarioSpec spec =
        scenario_from_options(sim_scenario, sim_identities, sim_frames, sim_fps,
                              sim_separation, sim_dim, sim_background, g.seed, seed_given);
    const SyntheticStream stream = generate(spec);
    save_stream(stream, sim_out_stream);
    save_ground_truth(stream.ground_truth, sim_out_gt);
    if (!sim_out_scenario.empty()) save_scenario(spec, sim_out_scenario);
    std::printf("simulated %zu frames, %zu identities, %zu background faces\n",
                stream.frames.size(), spec.identities.size(), spec.background.size());
    return 0;
  }

  if (*build) {
    ScenarioSpec spec = load_scenario(b_scenario);
    if (seed_given) spec.seed = g.seed;
    const auto clips = training_clips_from(spec, b_frames_per_identity);

    GalleryBuildConfig cfg;
    cfg.method = gallery_method_from_string(b_method);
    cfg.augment = b_augment;
    cfg.clustering.k = b_k;
    cfg.clustering.restarts = b_restarts;
    cfg.clustering.seed = spec.seed;
    cfg.augmentation.seed = spec.seed;

    std::unique_ptr<EmbedderBackend> backend;
    if (cfg.augment) {
      const int dim = clips.empty() || clips[0].embeddings.empty()
                          ? 16
                          : int(clips[0].embeddings[0].size());
      backend = make_backend(b_backend, dim, spec.seed);
      long total = 0;
      for (const auto& c : clips) total += long(c.faces.size());
      std::printf("augmentation: %ld chips -> %ld\n", total,
                  total * cfg.augmentation.copies_per_image);
    }

    const PrototypeGallery gallery = build_gallery(clips, cfg, backend.get(), g.threads);
    save_gallery(gallery, b_out);
    std::printf("gallery: %zu identities, %zu prototypes (method=%s k=%d)\n",
                gallery.identities.size(), gallery.prototype_count(),
                to_string(cfg.method), cfg.clustering.k);
    for (const auto& [label, entry] : gallery.identities) {
      std::printf("  %-16s %zu prototypes\n", label.c_str(), entry.prototypes.size());
    }
    return 0;
  }

  if (*rec) {
    const PrototypeGallery gallery = load_gallery(r_gallery);
    if (gallery.empty()) {
      throw std::runtime_error("gallery is empty; check --gallery " + r_gallery);
    }
    const SyntheticStream stream = load_stream(r_stream);

    TrackerConfig tcfg;
    tcfg.skip_frames = r_skip;
    tcfg.init_window_seconds = r_init_seconds;
    RecognizerConfig rcfg;
    rcfg.min_face_area = r_min_area;

    const ProcessOutput out = recognize_stream(stream, gallery, tcfg, rcfg);
    if (out.fault) {
      save_vid_result(out.vid, r_out);
      throw std::runtime_error("stream fault after " +
                               std::to_string(out.vid.frames.size()) +
                               " frames (partial result written): " + *out.fault);
    }
    save_vid_result(out.vid, r_out);
    if (!r_stats.empty()) save_stats(out.stats, r_stats);

    if (!r_deid_dir.empty()) {
      fs::create_directories(r_deid_dir);
      for (const FrameResult& fr : out.vid.frames) {
        Image frame = Image::filled(r_frame_w, r_frame_h, 1, 160);
        std::vector<Landmarks5> lms;
        for (const FaceRecord& f : fr.faces) lms.push_back(f.landmarks);
        redact_frame(frame, lms);
        write_pnm(frame, fs::path(r_deid_dir) / (std::to_string(fr.frame_index) + ".pgm"));
      }
    }
    std::printf("recognized %zu frames (%ld processed, %ld copied), %ld classify calls, %.4f s/frame\n",
                out.vid.frames.size(), out.stats.frames_processed, out.stats.frames_copied,
                out.stats.classify_invocations, out.stats.seconds_per_frame());
    return 0;
  }

  if (*ev) {
    const VidResult vid = load_vid_result(e_vidresult);
    const GroundTruth gt = load_ground_truth(e_gt);
    long vid_max = -1;
    for (const FrameResult& fr : vid.frames) vid_max = std::max(vid_max, fr.frame_index);
    if (gt.max_frame() > vid_max) {
      throw std::runtime_error("frame-range mismatch: ground truth covers frame " +
                               std::to_string(gt.max_frame()) + " but results stop at " +
                               std::to_string(vid_max));
    }

    ScoreReport report = score(vid, gt, e_iou);
    if (!e_stats.empty()) {
      std::ifstream in(e_stats);
      if (!in) throw std::runtime_error("cannot open stats file: " + e_stats);
      nlohmann::json stats;
      in >> stats;
      report.classify_invocations = stats.value("classify_invocations", 0L);
      report.seconds_per_frame = stats.value("seconds_per_frame", 0.0);
    }

    std::printf("%-20s %10s %8s %8s\n", "label", "accuracy", "matched", "gt");
    for (const auto& [label, acc] : report.per_label_accuracy) {
      std::printf("%-20s %9.1f%% %8ld %8ld\n", label.c_str(), 100.0 * acc,
                  report.label_matched_frames[label], report.label_gt_frames[label]);
    }
    std::printf("%-20s %9.1f%%\n", "average", 100.0 * report.average_accuracy);
    for (const std::string& label : report.spurious_labels) {
      std::printf("spurious label (never in GT): %s\n", label.c_str());
    }
    if (report.seconds_per_frame > 0.0) {
      std::printf("seconds/frame: %.4f  classify calls: %ld\n", report.seconds_per_frame,
                  report.classify_invocations);
      if (e_baseline_spf > 0.0) {
        const TimingReport tr = timing_report(e_baseline_spf, report.seconds_per_frame);
        std::printf("speedup vs baseline: %.1fx\n", tr.speedup);
      }
    }

    if (!e_out.empty()) {
      nlohmann::json doc;
      doc["average_accuracy"] = report.average_accuracy;
      doc["frames_scored"] = report.frames_scored;
      for (const auto& [label, acc] : report.per_label_accuracy) {
        doc["per_label"][label] = acc;
      }
      doc["spurious"] = report.spurious_labels;
      if (report.seconds_per_frame > 0.0) {
        doc["seconds_per_frame"] = report.seconds_per_frame;
        doc["classify_invocations"] = report.classify_invocations;
      }
      std::ofstream out(e_out);
      out << doc.dump(2) << "\n";
    }
    return 0;
  }

  if (*sw) {
    ScenarioSpec spec = load_scenario(s_scenario);
    if (seed_given) spec.seed = g.seed;
    spec.validate();
    const SyntheticStream stream = generate(spec);
    const auto clips = training_clips_from(spec, s_frames_per_identity);
    RecognizerConfig rcfg;
    rcfg.min_face_area = s_min_area;

    std::vector<double> axis;
    if (!s_values.empty()) {
      std::stringstream ss(s_values);
      std::string tok;
      while (std::getline(ss, tok, ',')) axis.push_back(std::stod(tok));
    }

    SweepResult sweep;
    double selected = 0.0;
    if (s_axis == "clusters") {
      long max_k = 0;
      {
        TrainingClip sampled = sparse_sample(clips[0]);
        max_k = long(sampled.embeddings.size());
      }
      if (axis.empty()) {
        for (int k : cluster_axis()) {
          if (k <= max_k) axis.push_back(double(k));
        }
      }
      sweep = run_sweep(
          axis,
          [&](double k) {
            GalleryBuildConfig cfg;
            cfg.method = gallery_method_from_string(s_method);
            cfg.clustering.k = int(k);
            cfg.clustering.seed = spec.seed;
            cfg.augmentation.seed = spec.seed;
            const PrototypeGallery gallery =
                build_gallery(clips, cfg, nullptr, g.threads);
            TrackerConfig tcfg;
            tcfg.skip_frames = s_skip_for_clusters;
            const ProcessOutput out = recognize_stream(stream, gallery, tcfg, rcfg);
            const ScoreReport report = score(out.vid, stream.ground_truth);
            return std::make_pair(report.average_accuracy,
                                  std::max(out.stats.total_seconds, 1e-9));
          },
          "clusters/" + s_scenario);
      selected = select_cluster_count(sweep);
    } else if (s_axis == "skip") {
      if (axis.empty()) axis = {0, 5, 10, 15, 20, 30, 60};
      GalleryBuildConfig cfg;
      cfg.method = gallery_method_from_string(s_method);
      cfg.clustering.k = s_k_for_skip;
      cfg.clustering.seed = spec.seed;
      cfg.augmentation.seed = spec.seed;
      const PrototypeGallery gallery = build_gallery(clips, cfg, nullptr, g.threads);
      sweep = run_sweep(
          axis,
          [&](double skip) {
            TrackerConfig tcfg;
            tcfg.skip_frames = int(skip);
            const ProcessOutput out = recognize_stream(stream, gallery, tcfg, rcfg);
            const ScoreReport report = score(out.vid, stream.ground_truth);
            return std::make_pair(report.average_accuracy,
                                  std::max(out.stats.total_seconds, 1e-9));
          },
          "skip/" + s_scenario);
      selected = select_skip_rate_single(sweep);
    } else {
      throw CLI::ValidationError("--axis must be 'clusters' or 'skip'");
    }

    const std::vector<TradeoffPoint> front = pareto_front(sweep.points);
    std::printf("%-12s %10s %12s %s\n", "parameter", "accuracy", "time(s)", "front");
    for (const TradeoffPoint& p : sweep.points) {
      bool on_front = false;
      for (const TradeoffPoint& q : front) {
        if (q.parameter == p.parameter) on_front = true;
      }
      std::printf("%-12g %9.1f%% %12.3f %s\n", p.parameter, 100.0 * p.accuracy,
                  p.time_cost, on_front ? "*" : "");
    }
    std::printf("selected %s: %g\n", s_axis.c_str(), selected);
    if (!s_csv.empty()) save_sweep_csv(sweep, s_csv);
    if (!s_json.empty()) save_sweep_json(sweep, front, selected, s_json);
    return 0;
  }

  if (*part) {
    const VidResult vid = load_vid_result(p_vidresult);
    if (vid.frames.empty()) throw std::runtime_error("vidresult has no frames");
    const ParticipationMap map = participation_map(vid, p_gap);
    const std::string svg = participation_svg(map, p_url);
    std::ofstream out(p_out);
    if (!out) throw std::runtime_error("cannot open for writing: " + p_out);
    out << svg;
    std::printf("participation map: %zu identities over %ld frames -> %s\n",
                map.rows.size(), map.total_frames, p_out.c_str());
    return 0;
  }

  if (*de) {
    const VidResult vid = load_vid_result(d_vidresult);
    fs::create_directories(d_out_dir);
    long written = 0;
    for (const FrameResult& fr : vid.frames) {
      if (d_limit >= 0 && written >= d_limit) break;
      Image frame;
      if (!d_frames_dir.empty()) {
        const fs::path pgm = fs::path(d_frames_dir) / (std::to_string(fr.frame_index) + ".pgm");
        const fs::path ppm = fs::path(d_frames_dir) / (std::to_string(fr.frame_index) + ".ppm");
        frame = read_pnm(fs::exists(pgm) ? pgm : ppm);
      } else {
        frame = Image::filled(d_frame_w, d_frame_h, 1, 160);
      }
      std::vector<Landmarks5> lms;
      for (const FaceRecord& f : fr.faces) lms.push_back(f.landmarks);
      redact_frame(frame, lms);
      write_pnm(frame, fs::path(d_out_dir) / (std::to_string(fr.frame_index) +
                                              (frame.channels == 1 ? ".pgm" : ".ppm")));
      ++written;
    }
    std::printf("wrote %ld redacted frames to %s\n", written, d_out_dir.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
