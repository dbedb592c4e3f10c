#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace facetrack {

/// One evaluated configuration on the accuracy/time plane.
struct TradeoffPoint {
  double parameter = 0.0;  // cluster count or skip rate
  double accuracy = 0.0;   // [0, 1]
  double time_cost = 0.0;  // seconds or seconds/frame, > 0
};

struct SweepResult {
  std::string provenance;  // video id, method
  std::vector<TradeoffPoint> points;
};

/// Non-dominated subset under (maximize accuracy, minimize time): p is kept
/// iff no q has accuracy >= p's and time <= p's with at least one strict.
/// Exact duplicates all survive; input order is preserved.
std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points);

struct SelectionConfig {
  /// Absolute accuracy band treated as "no drop in performance".
  double accuracy_tie_tol = 0.005;
};

/// Cluster-count rule: the maximum-accuracy front point wins; accuracy ties
/// within the tolerance resolve toward the smaller time cost. Throws on an
/// empty sweep.
double select_cluster_count(const SweepResult& sweep, const SelectionConfig& cfg = {});

/// Per-sweep skip-rate rule. The slowest positive-skip configuration is
/// dropped from consideration (a skip rate that buys no time over the most
/// conservative option is not a candidate); among the rest the highest
/// accuracy wins, with ties inside the tolerance resolved toward the
/// smaller, lower-risk skip. Throws on an empty sweep.
double select_skip_rate_single(const SweepResult& sweep, const SelectionConfig& cfg = {});

/// Modal winner across sweeps; vote ties prefer the smaller skip.
double select_skip_rate(const std::vector<SweepResult>& sweeps,
                        const SelectionConfig& cfg = {});

/// round(2^p) for p in [p_min, p_max] stepping by `step`, duplicates removed.
std::vector<int> cluster_axis(double p_min = 0.0, double p_max = 11.0, double step = 0.25);

using EvaluateFn = std::function<std::pair<double, double>(double parameter)>;

/// One TradeoffPoint per unique axis value, evaluated sequentially.
/// Evaluation failures are rethrown with the offending parameter attached.
SweepResult run_sweep(const std::vector<double>& axis, const EvaluateFn& evaluate,
                      std::string provenance);

/// parameter,accuracy,time_cost rows.
void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);

/// Plot-ready JSON: all points, the front, and the selected parameter.
void save_sweep_json(const SweepResult& sweep, const std::vector<TradeoffPoint>& front,
                     double selected, const std::filesystem::path& path);

}  // namespace facetrack
