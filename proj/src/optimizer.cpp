#include "facetrack/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace facetrack {

namespace {

bool dominates(const TradeoffPoint& q, const TradeoffPoint& p) {
  return q.accuracy >= p.accuracy && q.time_cost <= p.time_cost &&
         (q.accuracy > p.accuracy || q.time_cost < p.time_cost);
}

}  // namespace

std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points) {
  std::vector<TradeoffPoint> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (j != i && dominates(points[j], points[i])) dominated = true;
    }
    if (!dominated) front.push_back(points[i]);
  }
  return front;
}

double select_cluster_count(const SweepResult& sweep, const SelectionConfig& cfg) {
  if (sweep.points.empty()) {
    throw std::invalid_argument("select_cluster_count: empty sweep");
  }
  const std::vector<TradeoffPoint> front = pareto_front(sweep.points);
  double best_acc = -1.0;
  for (const TradeoffPoint& p : front) best_acc = std::max(best_acc, p.accuracy);

  const TradeoffPoint* pick = nullptr;
  for (const TradeoffPoint& p : front) {
    if (p.accuracy < best_acc - cfg.accuracy_tie_tol) continue;
    if (pick == nullptr || p.time_cost < pick->time_cost) pick = &p;
  }
  return pick->parameter;
}

double select_skip_rate_single(const SweepResult& sweep, const SelectionConfig& cfg) {
  if (sweep.points.empty()) {
    throw std::invalid_argument("select_skip_rate: empty sweep");
  }

  std::vector<const TradeoffPoint*> positive;
  for (const TradeoffPoint& p : sweep.points) {
    if (p.parameter > 0.0) positive.push_back(&p);
  }
  if (positive.empty()) {
    const TradeoffPoint* pick = &sweep.points.front();
    for (const TradeoffPoint& p : sweep.points) {
      if (p.accuracy > pick->accuracy) pick = &p;
    }
    return pick->parameter;
  }

  // Discard the slowest skipping configuration: if it cannot beat the most
  // conservative option on time, it is not a candidate speedup.
  double slowest = -1.0;
  for (const TradeoffPoint* p : positive) slowest = std::max(slowest, p->time_cost);
  std::vector<const TradeoffPoint*> candidates;
  for (const TradeoffPoint* p : positive) {
    if (p->time_cost < slowest) candidates.push_back(p);
  }
  if (candidates.empty()) candidates = positive;

  double best_acc = -1.0;
  for (const TradeoffPoint* p : candidates) best_acc = std::max(best_acc, p->accuracy);
  const TradeoffPoint* pick = nullptr;
  for (const TradeoffPoint* p : candidates) {
    if (p->accuracy < best_acc - cfg.accuracy_tie_tol) continue;
    if (pick == nullptr || p->parameter < pick->parameter) pick = p;
  }
  return pick->parameter;
}

double select_skip_rate(const std::vector<SweepResult>& sweeps, const SelectionConfig& cfg) {
  if (sweeps.empty()) throw std::invalid_argument("select_skip_rate: no sweeps");
  std::map<double, int> votes;
  for (const SweepResult& sweep : sweeps) {
    votes[select_skip_rate_single(sweep, cfg)] += 1;
  }
  // Modal winner; the map is ordered so equal vote counts fall to the
  // smaller skip.
  double winner = votes.begin()->first;
  int winner_votes = votes.begin()->second;
  for (const auto& [skip, n] : votes) {
    if (n > winner_votes) {
      winner = skip;
      winner_votes = n;
    }
  }
  return winner;
}

std::vector<int> cluster_axis(double p_min, double p_max, double step) {
  if (step <= 0.0) throw std::invalid_argument("cluster_axis: step must be positive");
  std::vector<int> values;
  std::set<int> seen;
  for (int i = 0;; ++i) {
    const double p = p_min + i * step;
    if (p > p_max + 1e-9) break;
    const int k = int(std::llround(std::pow(2.0, p)));
    if (seen.insert(k).second) values.push_back(k);
  }
  return values;
}

SweepResult run_sweep(const std::vector<double>& axis, const EvaluateFn& evaluate,
                      std::string provenance) {
  SweepResult result;
  result.provenance = std::move(provenance);
  std::set<double> seen;
  for (double v : axis) {
    if (!seen.insert(v).second) continue;
    try {
      const auto [accuracy, time_cost] = evaluate(v);
      result.points.push_back({v, accuracy, time_cost});
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep evaluation failed at parameter " +
                               std::to_string(v) + ": " + e.what());
    }
  }
  return result;
}

void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "parameter,accuracy,time_cost\n";
  char buf[128];
  for (const TradeoffPoint& p : sweep.points) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.parameter, p.accuracy,
                  p.time_cost);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void save_sweep_json(const SweepResult& sweep, const std::vector<TradeoffPoint>& front,
                     double selected, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["provenance"] = sweep.provenance;
  doc["selected"] = selected;
  auto to_json = [](const TradeoffPoint& p) {
    return nlohmann::json{
        {"parameter", p.parameter}, {"accuracy", p.accuracy}, {"time_cost", p.time_cost}};
  };
  for (const TradeoffPoint& p : sweep.points) doc["points"].push_back(to_json(p));
  doc["front"] = nlohmann::json::array();
  for (const TradeoffPoint& p : front) doc["front"].push_back(to_json(p));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << doc.dump(2) << "\n";
}

}  // namespace facetrack
