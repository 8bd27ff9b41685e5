#include "mintops/planner.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "mintops/errors.hpp"

namespace mintops::planner {

namespace {

constexpr std::array<Coord, 4> kSteps{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

struct OpenEntry {
  int f;
  int y;
  int x;
  bool operator>(const OpenEntry& o) const {
    return std::tie(f, y, x) > std::tie(o.f, o.y, o.x);
  }
};

}  // namespace

std::vector<Coord> TaskPlan::cells() const {
  std::vector<Coord> out;
  for (const auto& seg : segments) {
    auto first = seg.cells.begin();
    if (!out.empty() && first != seg.cells.end() && *first == out.back()) ++first;
    out.insert(out.end(), first, seg.cells.end());
  }
  return out;
}

std::optional<Trajectory> plan_path(const SemanticMap& map, Coord start, Coord goal) {
  if (!map.in_bounds(start) || !map.in_bounds(goal)) {
    throw std::invalid_argument("plan_path: start or goal out of bounds");
  }
  if (map.blocked(start) || map.blocked(goal)) return std::nullopt;

  const std::size_t n = static_cast<std::size_t>(map.width()) * static_cast<std::size_t>(map.height());
  constexpr int kUnseen = std::numeric_limits<int>::max();
  std::vector<int> g(n, kUnseen);
  std::vector<int> parent(n, -1);
  std::vector<unsigned char> closed(n, 0);

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  g[map.index(start)] = 0;
  open.push({manhattan(start, goal), start.y, start.x});

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const Coord cur{top.x, top.y};
    const std::size_t ci = map.index(cur);
    if (closed[ci]) continue;
    closed[ci] = 1;
    if (cur == goal) break;
    for (const auto& d : kSteps) {
      const Coord next{cur.x + d.x, cur.y + d.y};
      if (map.blocked(next)) continue;
      const std::size_t ni = map.index(next);
      if (closed[ni]) continue;
      const int cand = g[ci] + 1;
      if (cand < g[ni]) {
        g[ni] = cand;
        parent[ni] = static_cast<int>(ci);
        open.push({cand + manhattan(next, goal), next.y, next.x});
      }
    }
  }

  const std::size_t gi = map.index(goal);
  if (g[gi] == kUnseen) return std::nullopt;
  Trajectory t;
  for (int i = static_cast<int>(gi); i != -1; i = parent[static_cast<std::size_t>(i)]) {
    t.cells.push_back({i % map.width(), i / map.width()});
  }
  std::reverse(t.cells.begin(), t.cells.end());
  t.cost = static_cast<int>(t.cells.size()) - 1;
  return t;
}

std::optional<int> dijkstra_reference(const SemanticMap& map, Coord start, Coord goal) {
  if (!map.in_bounds(start) || !map.in_bounds(goal)) return std::nullopt;
  if (map.blocked(start) || map.blocked(goal)) return std::nullopt;
  const std::size_t n = static_cast<std::size_t>(map.width()) * static_cast<std::size_t>(map.height());
  std::vector<int> dist(n, -1);
  using Item = std::pair<int, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[map.index(start)] = 0;
  pq.push({0, map.index(start)});
  while (!pq.empty()) {
    auto [d, idx] = pq.top();
    pq.pop();
    if (d != dist[idx]) continue;
    const Coord cur{static_cast<int>(idx) % map.width(), static_cast<int>(idx) / map.width()};
    if (cur == goal) return d;
    for (const auto& s : kSteps) {
      const Coord next{cur.x + s.x, cur.y + s.y};
      if (map.blocked(next)) continue;
      const std::size_t ni = map.index(next);
      if (dist[ni] == -1 || d + 1 < dist[ni]) {
        dist[ni] = d + 1;
        pq.push({d + 1, ni});
      }
    }
  }
  return std::nullopt;
}

std::optional<TaskPlan> plan_task(const world::Scene& scene, const SemanticMap& map,
                                  const std::vector<std::string>& goal_choice) {
  std::vector<Coord> goals;
  goals.reserve(goal_choice.size());
  for (const auto& id : goal_choice) {
    const auto* o = scene.find_object(id);
    if (o == nullptr) throw ValidationError("goal_choice: unknown object id '" + id + "'");
    goals.push_back(o->cell);
  }

  TaskPlan plan;
  plan.goal_choice = goal_choice;
  Coord from = scene.start;
  for (const auto& goal : goals) {
    auto seg = plan_path(map, from, goal);
    if (!seg) return std::nullopt;
    plan.total_cost += seg->cost;
    plan.segments.push_back(std::move(*seg));
    from = goal;
  }
  return plan;
}

double divergence(std::span<const Coord> a, std::span<const Coord> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("divergence: empty trajectory");
  // Rolling-row DP over the coupling lattice.
  std::vector<double> prev(b.size()), cur(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = chebyshev(a[i], b[j]);
      double reach;
      if (i == 0 && j == 0) {
        reach = 0.0;
      } else if (i == 0) {
        reach = cur[j - 1];
      } else if (j == 0) {
        reach = prev[0];
      } else {
        reach = std::min({prev[j], prev[j - 1], cur[j - 1]});
      }
      cur[j] = std::max(reach, d);
    }
    std::swap(prev, cur);
  }
  return prev.back();
}

double divergence(const Trajectory& a, const Trajectory& b) {
  return divergence(std::span<const Coord>(a.cells), std::span<const Coord>(b.cells));
}

double plan_cost(const std::optional<TaskPlan>& plan) {
  return plan ? static_cast<double>(plan->total_cost) : kInfiniteCost;
}

double plan_divergence(const std::optional<TaskPlan>& a, const std::optional<TaskPlan>& b) {
  if (!a && !b) return 0.0;
  if (!a || !b) return kInfiniteCost;
  if (a->segments.size() == b->segments.size() && !a->segments.empty()) {
    // Stops matter as much as the route between them.
    double d = 0.0;
    for (std::size_t i = 0; i < a->segments.size(); ++i) {
      d = std::max(d, divergence(a->segments[i], b->segments[i]));
    }
    return d;
  }
  const auto ca = a->cells();
  const auto cb = b->cells();
  if (ca.empty() && cb.empty()) return 0.0;
  if (ca.empty() || cb.empty()) return kInfiniteCost;
  return divergence(std::span<const Coord>(ca), std::span<const Coord>(cb));
}

std::vector<std::vector<Coord>> plan_signature(const std::optional<TaskPlan>& plan) {
  std::vector<std::vector<Coord>> out;
  if (!plan) return out;
  for (const auto& s : plan->segments) out.push_back(s.cells);
  return out;
}

bool is_valid_path(const SemanticMap& map, const Trajectory& t) {
  if (t.cells.empty()) return false;
  if (t.cost != static_cast<int>(t.cells.size()) - 1) return false;
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    if (map.blocked(t.cells[i])) return false;
    if (i > 0 && manhattan(t.cells[i - 1], t.cells[i]) != 1) return false;
  }
  return true;
}

}  // namespace mintops::planner
