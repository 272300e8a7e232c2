#include "hence/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace hence::data {
namespace {

constexpr int kMaxAttempts = 10;

struct Point {
  double x{0.0};
  double y{0.0};
};

struct Edge {
  std::size_t u{0};
  std::size_t v{0};
  double length{0.0};
};

bool connected(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& e : edges) {
    const std::size_t a = find(e.u);
    const std::size_t b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components <= 1;
}

/// Weighted edge betweenness (Brandes), lengths as weights.
std::vector<double> edge_betweenness(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbor, edge)
  for (std::size_t k = 0; k < edges.size(); ++k) {
    adj[edges[k].u].emplace_back(edges[k].v, k);
    adj[edges[k].v].emplace_back(edges[k].u, k);
  }
  std::vector<double> score(edges.size(), 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> dist(n, inf);
    std::vector<double> sigma(n, 0.0);
    std::vector<double> delta(n, 0.0);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> preds(n);
    std::vector<std::size_t> order;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[s] = 0.0;
    sigma[s] = 1.0;
    queue.emplace(0.0, s);
    std::vector<bool> done(n, false);
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (done[u]) continue;
      done[u] = true;
      order.push_back(u);
      for (const auto& [v, k] : adj[u]) {
        const double nd = d + edges[k].length;
        if (nd < dist[v]) {
          dist[v] = nd;
          sigma[v] = sigma[u];
          preds[v].assign(1, {u, k});
          queue.emplace(nd, v);
        } else if (nd == dist[v] && !done[v]) {
          sigma[v] += sigma[u];
          preds[v].emplace_back(u, k);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (const auto& [v, k] : preds[w]) {
        const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
        score[k] += c;
        delta[v] += c;
      }
    }
  }
  return score;
}

/// Top 10% motorway, next 20% primary, next 30% secondary, rest residential.
std::vector<graph::RoadClass> classes_by_rank(const std::vector<double>& score) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  const double m = static_cast<double>(score.size());
  const auto cut1 = static_cast<std::size_t>(std::ceil(0.1 * m));
  const auto cut2 = static_cast<std::size_t>(std::ceil(0.3 * m));
  const auto cut3 = static_cast<std::size_t>(std::ceil(0.6 * m));
  std::vector<graph::RoadClass> out(score.size(), graph::RoadClass::residential);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    graph::RoadClass c = graph::RoadClass::residential;
    if (rank < cut1) {
      c = graph::RoadClass::motorway;
    } else if (rank < cut2) {
      c = graph::RoadClass::primary;
    } else if (rank < cut3) {
      c = graph::RoadClass::secondary;
    }
    out[order[rank]] = c;
  }
  return out;
}

double normalize(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }

struct RegionDraw {
  graph::RoadGraph road;
  std::vector<Point> km;                 // node positions in km
  std::vector<std::size_t> community;    // local community index per node
  std::vector<double> population;        // per local community
};

RegionDraw draw_region(const SynthParams& p, std::int64_t region_id, std::mt19937_64& rng) {
  const std::size_t side = p.grid_side;
  const std::size_t n = side * side;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RegionDraw out;
  const auto [bx, by] = community_blocks(p.communities_per_region);
  const double spacing = p.node_spacing_km * std::exp(p.spacing_sigma * normal(rng));
  std::vector<double> gap_x(bx), gap_y(by);
  for (auto& g : gap_x) g = spacing * std::exp(p.block_spacing_sigma * normal(rng));
  for (auto& g : gap_y) g = spacing * std::exp(p.block_spacing_sigma * normal(rng));
  // Street i of the grid sits in block column i * bx / side.
  std::vector<double> xs(side), ys(side);
  for (std::size_t i = 1; i < side; ++i) {
    xs[i] = xs[i - 1] + 0.5 * (gap_x[(i - 1) * bx / side] + gap_x[i * bx / side]);
    ys[i] = ys[i - 1] + 0.5 * (gap_y[(i - 1) * by / side] + gap_y[i * by / side]);
  }
  out.km.resize(n);
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const double jx = (0.4 * unit(rng) - 0.2) * gap_x[i * bx / side];
      const double jy = (0.4 * unit(rng) - 0.2) * gap_y[j * by / side];
      out.km[j * side + i] = {xs[i] + jx, ys[j] + jy};
    }
  }
  std::vector<Edge> candidates;
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const std::size_t a = j * side + i;
      if (i + 1 < side) candidates.push_back({a, a + 1, 0.0});
      if (j + 1 < side) candidates.push_back({a, a + side, 0.0});
    }
  }
  for (auto& e : candidates) {
    const double d = std::hypot(out.km[e.u].x - out.km[e.v].x, out.km[e.u].y - out.km[e.v].y);
    e.length = d * (1.0 + 0.15 * unit(rng));
  }

  std::vector<Edge> kept;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
    kept.clear();
    for (const auto& e : candidates)
      if (unit(rng) >= p.edge_drop_prob) kept.push_back(e);
    ok = connected(n, kept);
  }
  if (!ok) {
    throw std::runtime_error("region " + std::to_string(region_id) + ": no connected road network after " +
                             std::to_string(kMaxAttempts) + " attempts");
  }
  const auto classes = classes_by_rank(edge_betweenness(n, kept));

  double x_lo = out.km[0].x, x_hi = x_lo, y_lo = out.km[0].y, y_hi = y_lo;
  for (const auto& q : out.km) {
    x_lo = std::min(x_lo, q.x);
    x_hi = std::max(x_hi, q.x);
    y_lo = std::min(y_lo, q.y);
    y_hi = std::max(y_hi, q.y);
  }
  std::vector<graph::Intersection> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = {region_id * 10000 + static_cast<std::int64_t>(i), normalize(out.km[i].x, x_lo, x_hi),
                normalize(out.km[i].y, y_lo, y_hi)};
  }
  std::vector<graph::Segment> segments;
  segments.reserve(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& a = nodes[kept[k].u];
    const auto& b = nodes[kept[k].v];
    segments.push_back({a.id, b.id, 0.5 * (a.rel_lon + b.rel_lon), 0.5 * (a.rel_lat + b.rel_lat), kept[k].length,
                        classes[k]});
  }
  out.road = graph::build_road_graph(region_id, std::move(nodes), std::move(segments));

  out.community.resize(n);
  std::vector<std::size_t> members(p.communities_per_region, 0);
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const std::size_t c = (j * by / side) * bx + i * bx / side;
      out.community[j * side + i] = c;
      ++members[c];
    }
  }
  out.population.resize(p.communities_per_region);
  for (std::size_t c = 0; c < members.size(); ++c) {
    const double density = p.node_spacing_km * p.node_spacing_km / (gap_x[c % bx] * gap_y[c / bx]);
    out.population[c] = 2000.0 * std::pow(density, p.density_exponent) *
                        std::exp(p.population_sigma * normal(rng)) * static_cast<double>(members[c]) / 9.0;
  }
  return out;
}

Point centroid(const std::vector<Point>& pts, const std::vector<std::size_t>& groups, std::size_t g) {
  Point c;
  double count = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (groups[i] != g) continue;
    c.x += pts[i].x;
    c.y += pts[i].y;
    count += 1.0;
  }
  c.x /= count;
  c.y /= count;
  return c;
}

}  // namespace

void SynthParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("synthetic parameters: " + what); };
  if (n_regions < 1) fail("n_regions must be at least 1");
  if (n_regions > 9999) fail("n_regions must be below 10000");
  if (grid_side < 2 || grid_side > 99) fail("grid_side must lie in [2, 99]");
  if (communities_per_region < 1 || communities_per_region > 99) fail("communities_per_region must lie in [1, 99]");
  const auto [bx, by] = community_blocks(communities_per_region);
  if (bx > grid_side || by > grid_side) fail("too many communities for the grid side");
  if (!(noise_std >= 0.0)) fail("noise_std must be non-negative");
  if (!(gravity_exponent >= 0.0)) fail("gravity_exponent must be non-negative");
  if (!(edge_drop_prob >= 0.0 && edge_drop_prob <= 1.0)) fail("edge_drop_prob must lie in [0, 1]");
  if (!(node_spacing_km > 0.0) || !(region_spacing_km > 0.0)) fail("spacings must be positive");
  if (!(intra_flow_scale >= 0.0) || !(inter_flow_scale >= 0.0)) fail("flow scales must be non-negative");
  if (!(trunk_km >= 0.0)) fail("trunk_km must be non-negative");
  if (!std::isfinite(density_exponent)) fail("density_exponent must be finite");
  if (!(spacing_sigma >= 0.0) || !(block_spacing_sigma >= 0.0) || !(population_sigma >= 0.0) ||
      !(propensity_sigma >= 0.0)) {
    fail("lognormal spreads must be non-negative");
  }
  for (std::size_t c = 0; c < graph::kRoadClassCount; ++c) {
    if (!(classes.speed_kmh[c] > 0.0) || !(classes.emission_kg_per_km[c] > 0.0)) {
      fail("class speeds and emission factors must be positive");
    }
  }
}

std::pair<std::size_t, std::size_t> community_blocks(std::size_t communities) {
  std::size_t bx = 1;
  for (std::size_t d = 1; d * d <= communities; ++d)
    if (communities % d == 0) bx = d;
  return {bx, communities / bx};
}

Dataset generate_synthetic(const SynthParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset ds;
  std::vector<RegionDraw> draws;
  draws.reserve(p.n_regions);
  for (std::size_t r = 0; r < p.n_regions; ++r) {
    const auto region_id = static_cast<std::int64_t>(r + 1);
    draws.push_back(draw_region(p, region_id, rng));
    const auto& d = draws.back();
    for (std::size_t i = 0; i < d.road.node_count(); ++i) {
      const std::int64_t community = region_id * 100 + static_cast<std::int64_t>(d.community[i]) + 1;
      ds.hierarchy.node_to_community[d.road.intersections[i].id] = community;
      ds.hierarchy.community_to_region[community] = region_id;
    }
  }

  // Intra-region gravity flows between community pairs.
  for (std::size_t r = 0; r < p.n_regions; ++r) {
    const auto& d = draws[r];
    const double propensity = std::exp(p.propensity_sigma * normal(rng));
    const auto region_id = static_cast<std::int64_t>(r + 1);
    const std::size_t k = p.communities_per_region;
    std::vector<Point> centers(k);
    for (std::size_t c = 0; c < k; ++c) centers[c] = centroid(d.km, d.community, c);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (a == b) continue;
        const double dist = std::max(std::hypot(centers[a].x - centers[b].x, centers[a].y - centers[b].y), 0.3);
        const double flow = p.intra_flow_scale * propensity * (d.population[a] / 1000.0) *
                            (d.population[b] / 1000.0) / std::pow(dist, p.gravity_exponent);
        if (flow > 0.0) {
          ds.od.push_back({graph::Level::community, region_id * 100 + static_cast<std::int64_t>(a) + 1,
                           region_id * 100 + static_cast<std::int64_t>(b) + 1, flow});
        }
      }
    }
  }

  // Inter-region flows between nearby regions on the region grid.
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p.n_regions))));
  auto cell = [&](std::size_t r) { return std::pair<long, long>(static_cast<long>(r % cols), static_cast<long>(r / cols)); };
  std::vector<double> region_pop(p.n_regions, 0.0);
  std::vector<double> outward(p.n_regions, 0.0);
  for (std::size_t r = 0; r < p.n_regions; ++r) {
    for (double pop : draws[r].population) region_pop[r] += pop;
    outward[r] = std::exp(p.propensity_sigma * normal(rng));
  }
  const auto radius = static_cast<long>(p.inter_od_radius);
  for (std::size_t a = 0; a < p.n_regions; ++a) {
    for (std::size_t b = 0; b < p.n_regions; ++b) {
      if (a == b) continue;
      const auto [ax, ay] = cell(a);
      const auto [bx, by] = cell(b);
      const long cheb = std::max(std::abs(ax - bx), std::abs(ay - by));
      if (cheb > radius) continue;
      const double dist = std::hypot(static_cast<double>(ax - bx), static_cast<double>(ay - by)) * p.region_spacing_km;
      const double flow = p.inter_flow_scale * outward[a] * (region_pop[a] / 1000.0) * (region_pop[b] / 1000.0) /
                          std::pow(dist, p.gravity_exponent);
      if (flow > 0.0) {
        ds.od.push_back({graph::Level::region, static_cast<std::int64_t>(a + 1), static_cast<std::int64_t>(b + 1), flow});
      }
    }
  }
  for (std::size_t a = 0; a < p.n_regions; ++a) {
    for (std::size_t b = a + 1; b < p.n_regions; ++b) {
      const auto [ax, ay] = cell(a);
      const auto [bx, by] = cell(b);
      if (std::abs(ax - bx) + std::abs(ay - by) == 1) {
        ds.region_adjacency.emplace_back(static_cast<std::int64_t>(a + 1), static_cast<std::int64_t>(b + 1));
      }
    }
  }

  for (auto& d : draws) ds.regions.push_back(std::move(d.road));
  OracleOptions options;
  options.classes = p.classes;
  options.trunk_km = p.trunk_km;
  auto oracle = oracle_emission(ds.regions, ds.hierarchy, ds.od, options);
  for (const auto& w : oracle.warnings) spdlog::warn("{}", w);
  for (const auto& [region, value] : oracle.emission) {
    const double noise = normal(rng);
    if (value > 0.0) ds.labels[region] = p.noise_std == 0.0 ? value : value * std::exp(p.noise_std * noise);
  }
  ds.validate();
  return ds;
}

}  // namespace hence::data
