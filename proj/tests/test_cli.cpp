#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "facetrack/evaluation.hpp"
#include "facetrack/image.hpp"
#include "facetrack/tracker.hpp"

using namespace facetrack;
namespace fs = std::filesystem;

namespace {

const std::string kCli = FACETRACK_CLI_PATH;

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct CliWorkspace {
  fs::path dir;
  CliWorkspace() : dir(fs::temp_directory_path() / "facetrack_cli_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~CliWorkspace() { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit 1, data errors exit 2, success exits 0") {
  CliWorkspace ws;
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("definitely-not-a-command") == 1);
  CHECK(run_cli("recognize") == 1);  // missing required flags
  CHECK(run_cli("recognize --gallery " + ws.p("nope.txt") + " --stream " +
                ws.p("nope2.txt") + " --out " + ws.p("out.txt")) == 2);
}

TEST_CASE("full pipeline through the CLI produces scoreable output") {
  CliWorkspace ws;
  REQUIRE(run_cli("simulate --seed 5 --identities 3 --frames 120 --out-stream " +
                  ws.p("stream.txt") + " --out-gt " + ws.p("gt") + " --out-scenario " +
                  ws.p("scenario.json")) == 0);
  REQUIRE(run_cli("build-gallery --seed 5 --scenario " + ws.p("scenario.json") +
                  " --method sampling --frames-per-identity 120 --out " +
                  ws.p("gallery.txt")) == 0);
  REQUIRE(run_cli("recognize --seed 5 --gallery " + ws.p("gallery.txt") + " --stream " +
                  ws.p("stream.txt") + " --out " + ws.p("result.txt") + " --stats " +
                  ws.p("stats.json")) == 0);
  REQUIRE(run_cli("evaluate --vidresult " + ws.p("result.txt") + " --gt " + ws.p("gt") +
                  " --stats " + ws.p("stats.json") + " --out " + ws.p("report.json")) == 0);

  const VidResult vid = load_vid_result(ws.p("result.txt"));
  CHECK(vid.frames.size() == 120);
  const GroundTruth gt = load_ground_truth(ws.p("gt"));
  const ScoreReport report = score(vid, gt);
  CHECK(report.average_accuracy >= 0.99);

  std::ifstream in(ws.p("report.json"));
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("average_accuracy") != std::string::npos);
}

TEST_CASE("fast-method gallery builds through the CLI with augmentation") {
  CliWorkspace ws;
  REQUIRE(run_cli("simulate --seed 6 --identities 2 --frames 90 --out-stream " +
                  ws.p("stream.txt") + " --out-gt " + ws.p("gt") + " --out-scenario " +
                  ws.p("scenario.json")) == 0);
  REQUIRE(run_cli("build-gallery --seed 6 --scenario " + ws.p("scenario.json") +
                  " --method sampling+kmeans --augment --k 3 --frames-per-identity 60 "
                  "--out " + ws.p("gallery.txt")) == 0);
  const PrototypeGallery g = load_gallery(ws.p("gallery.txt"));
  REQUIRE(g.identities.size() == 2);
  for (const auto& [label, entry] : g.identities) CHECK(entry.prototypes.size() == 3);
}

TEST_CASE("evaluate rejects ground truth that outruns the results") {
  CliWorkspace ws;
  REQUIRE(run_cli("simulate --seed 7 --identities 1 --frames 90 --out-stream " +
                  ws.p("stream.txt") + " --out-gt " + ws.p("gt") + " --out-scenario " +
                  ws.p("scenario.json")) == 0);
  REQUIRE(run_cli("build-gallery --seed 7 --scenario " + ws.p("scenario.json") +
                  " --method sampling --frames-per-identity 90 --out " +
                  ws.p("gallery.txt")) == 0);
  REQUIRE(run_cli("recognize --seed 7 --gallery " + ws.p("gallery.txt") + " --stream " +
                  ws.p("stream.txt") + " --out " + ws.p("result.txt")) == 0);
  // Ground truth extending past the results is a frame-range mismatch.
  std::ofstream(fs::path(ws.p("gt")) / "500.txt") << "PersonA 0 0 60 60\n";
  CHECK(run_cli("evaluate --vidresult " + ws.p("result.txt") + " --gt " + ws.p("gt")) == 2);
}

TEST_CASE("deid renders redacted frames for the recognized faces") {
  CliWorkspace ws;
  REQUIRE(run_cli("simulate --seed 8 --identities 2 --frames 70 --out-stream " +
                  ws.p("stream.txt") + " --out-gt " + ws.p("gt") + " --out-scenario " +
                  ws.p("scenario.json")) == 0);
  REQUIRE(run_cli("build-gallery --seed 8 --scenario " + ws.p("scenario.json") +
                  " --method sampling --frames-per-identity 70 --out " +
                  ws.p("gallery.txt")) == 0);
  REQUIRE(run_cli("recognize --seed 8 --gallery " + ws.p("gallery.txt") + " --stream " +
                  ws.p("stream.txt") + " --out " + ws.p("result.txt")) == 0);
  REQUIRE(run_cli("deid --vidresult " + ws.p("result.txt") + " --out-dir " + ws.p("deid") +
                  " --frame-width 640 --frame-height 480 --limit 3") == 0);

  const Image frame = read_pnm(fs::path(ws.p("deid")) / "0.pgm");
  CHECK(frame.width == 640);
  CHECK(frame.height == 480);
  long black = 0;
  for (std::uint8_t p : frame.pixels) {
    if (p == 0) ++black;
  }
  CHECK(black > 0);  // the eye boxes were filled
  CHECK(!fs::exists(fs::path(ws.p("deid")) / "3.pgm"));  // --limit respected
}

TEST_CASE("sweep over skip rates writes csv/json and picks a tested value") {
  CliWorkspace ws;
  REQUIRE(run_cli("simulate --seed 9 --identities 2 --frames 150 --out-stream " +
                  ws.p("stream.txt") + " --out-gt " + ws.p("gt") + " --out-scenario " +
                  ws.p("scenario.json")) == 0);
  REQUIRE(run_cli("sweep --seed 9 --axis skip --values 0,5,10 --scenario " +
                  ws.p("scenario.json") + " --frames-per-identity 120 --k 4 --out-csv " +
                  ws.p("sweep.csv") + " --out-json " + ws.p("sweep.json")) == 0);
  std::ifstream csv(ws.p("sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "parameter,accuracy,time_cost");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 3);
  std::ifstream json(ws.p("sweep.json"));
  std::stringstream ss;
  ss << json.rdbuf();
  CHECK(ss.str().find("\"selected\"") != std::string::npos);
}

TEST_CASE("config files provide defaults and flags win") {
  CliWorkspace ws;
  REQUIRE(run_cli("simulate --seed 4 --identities 1 --frames 80 --out-stream " +
                  ws.p("stream.txt") + " --out-gt " + ws.p("gt") + " --out-scenario " +
                  ws.p("scenario.json")) == 0);
  std::ofstream(ws.p("cfg.toml")) << "seed = 4\n";
  REQUIRE(run_cli("build-gallery --config " + ws.p("cfg.toml") + " --scenario " +
                  ws.p("scenario.json") + " --method sampling --frames-per-identity 80 "
                  "--out " + ws.p("g1.txt")) == 0);
  REQUIRE(run_cli("build-gallery --seed 4 --scenario " + ws.p("scenario.json") +
                  " --method sampling --frames-per-identity 80 --out " +
                  ws.p("g2.txt")) == 0);
  std::ifstream a(ws.p("g1.txt")), b(ws.p("g2.txt"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}
