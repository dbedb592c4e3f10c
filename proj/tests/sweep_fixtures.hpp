// Reference accuracy/time sweep tables used as replay fixtures for the
// selection rules, shared between the unit and acceptance suites.
#pragma once

#include "facetrack/optimizer.hpp"

namespace facetrack::sweeptest {

// Cluster-count sweeps (accuracy, seconds) per cluster count.
inline SweepResult sweep_6a() {
  SweepResult s;
  s.provenance = "clusters/video-6A";
  s.points = {{16, 0.243, 129},  {32, 0.397, 130},  {64, 0.49, 143},
              {128, 0.498, 153}, {256, 0.505, 184}, {512, 0.749, 272},
              {1024, 0.74, 356}};
  return s;
}

inline SweepResult sweep_5a() {
  SweepResult s;
  s.provenance = "clusters/video-5A";
  s.points = {{16, 0.212, 304},  {32, 0.232, 312},  {64, 0.377, 320},
              {128, 0.232, 333}, {256, 0.403, 374}, {512, 0.646, 454},
              {1024, 0.654, 565}};
  return s;
}

inline SweepResult sweep_3b() {
  SweepResult s;
  s.provenance = "clusters/video-3B";
  s.points = {{16, 0.515, 52},   {32, 0.519, 55},   {64, 0.52, 87.6},
              {128, 0.606, 107}, {256, 0.582, 111}, {512, 0.756, 251},
              {1024, 0.608, 294}};
  return s;
}

// Skip-rate sweeps (accuracy, seconds) per skipped-frame count.
inline SweepResult sweep_skip_2b() {
  SweepResult s;
  s.provenance = "skip/video-2B";
  s.points = {{0, 0.895, 955}, {5, 0.905, 366},  {10, 0.888, 309}, {15, 0.830, 335},
              {20, 0.869, 345}, {30, 0.889, 325}, {60, 0.65, 310}};
  return s;
}

inline SweepResult sweep_skip_2c() {
  SweepResult s;
  s.provenance = "skip/video-2C";
  s.points = {{0, 0.375, 1059}, {5, 0.384, 385},  {10, 0.400, 370}, {15, 0.335, 335},
              {20, 0.339, 311}, {30, 0.351, 298}, {60, 0.400, 297}};
  return s;
}

inline SweepResult sweep_skip_3c() {
  SweepResult s;
  s.provenance = "skip/video-3C";
  s.points = {{0, 0.341, 3447}, {5, 0.338, 1595}, {10, 0.258, 1151}, {15, 0.369, 125},
              {20, 0.322, 106}, {30, 0.347, 95},  {60, 0.31, 89}};
  return s;
}

inline SweepResult sweep_skip_4() {
  SweepResult s;
  s.provenance = "skip/video-4";
  s.points = {{0, 0.986, 530}, {5, 0.991, 303},  {10, 0.995, 290}, {15, 0.985, 245},
              {20, 0.993, 281}, {30, 0.968, 276}, {60, 0.977, 274}};
  return s;
}

}  // namespace facetrack::sweeptest
