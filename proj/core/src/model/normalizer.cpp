#include "hence/model/normalizer.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace hence::model {

ZScore ZScore::fit(std::span<const double> rows, std::size_t cols) {
  ZScore z;
  z.mean.assign(cols, 0.0);
  z.std.assign(cols, 1.0);
  if (cols == 0 || rows.size() % cols != 0) throw std::invalid_argument("ZScore::fit: ragged rows");
  const std::size_t n = rows.size() / cols;
  if (n == 0) return z;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < cols; ++c) z.mean[c] += rows[i * cols + c];
  for (auto& m : z.mean) m /= static_cast<double>(n);
  std::vector<double> var(cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = rows[i * cols + c] - z.mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const double s = std::sqrt(var[c] / static_cast<double>(n));
    z.std[c] = s > 1e-12 ? s : 1.0;
  }
  return z;
}

void ZScore::apply(std::span<double> rows) const {
  const std::size_t cols = mean.size();
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = (rows[i] - mean[i % cols]) / std[i % cols];
}

Normalizer Normalizer::fit(const data::Dataset& ds, std::span<const std::int64_t> train_regions) {
  if (train_regions.empty()) throw std::invalid_argument("Normalizer::fit: empty training split");
  const std::set<std::int64_t> train(train_regions.begin(), train_regions.end());
  std::vector<double> nodes;
  std::vector<double> edges;
  std::vector<double> labels;
  for (std::int64_t r : train) {
    const auto& g = ds.region(r);
    const auto nf = g.node_features();
    nodes.insert(nodes.end(), nf.begin(), nf.end());
    for (const auto& s : g.segments) {
      const auto row = graph::segment_features(s);
      edges.insert(edges.end(), row.begin(), row.end());
    }
    const auto it = ds.labels.find(r);
    if (it != ds.labels.end()) labels.push_back(std::log1p(it->second));
  }
  std::vector<double> community_flow;
  std::vector<double> region_flow;
  for (const auto& f : ds.od) {
    if (f.level == graph::Level::community) {
      if (train.count(ds.hierarchy.community_to_region.at(f.origin))) community_flow.push_back(std::log1p(f.flow));
    } else if (train.count(f.origin) || train.count(f.dest)) {
      region_flow.push_back(std::log1p(f.flow));
    }
  }
  Normalizer n;
  n.node = ZScore::fit(nodes, graph::RoadGraph::kNodeFeatures);
  n.edge = ZScore::fit(edges, graph::RoadGraph::kEdgeFeatures);
  n.community_flow = ZScore::fit(community_flow, 1);
  n.region_flow = ZScore::fit(region_flow, 1);
  n.label = ZScore::fit(labels, 1);
  return n;
}

double Normalizer::label_forward(double raw) const { return label.forward(std::log1p(raw)); }

double Normalizer::label_inverse(double normalized) const { return std::expm1(label.inverse(normalized)); }

}  // namespace hence::model
