#include "hence/egat/egat_layer.hpp"

#include <numeric>

#include "hence/error.hpp"

namespace hence::egat {

EgatDims EgatParams::dims() const {
  EgatDims d;
  d.node_in = W.rows();
  d.node_out = W.cols();
  d.attention = U.cols();
  d.edge_in = U.rows() - 2 * d.node_in;
  d.edge_out = A.defined() ? A.cols() : 0;
  return d;
}

EgatParams make_egat_params(ad::ParameterSet& params, const std::string& prefix, EgatDims dims,
                            bool edge_update, std::mt19937_64& rng) {
  const std::size_t width = dims.concat_width();
  EgatParams p;
  p.W = params.add(prefix + ".W", {dims.node_in, dims.node_out}, {}, rng);
  p.U = params.add(prefix + ".U", {width, dims.attention}, {}, rng);
  p.a = params.add(prefix + ".a", {dims.attention, 1}, {}, rng);
  if (edge_update) p.A = params.add(prefix + ".A", {width, dims.edge_out}, {}, rng);
  return p;
}

EgatOutput egat_layer(const ad::Tensor& nodes, const ad::Tensor& edges, std::span<const Arc> arcs,
                      const EgatParams& params, const EgatOptions& options) {
  const std::size_t n = nodes.rows();
  const std::size_t m = arcs.size();
  const std::size_t d_in = nodes.cols();
  if (params.W.rows() != d_in) {
    throw DimensionError("egat_layer: node features " + ad::to_string(nodes.shape()) +
                         " do not fit W " + ad::to_string(params.W.shape()));
  }
  if (params.U.rows() < 2 * d_in) {
    throw DimensionError("egat_layer: U " + ad::to_string(params.U.shape()) +
                         " too narrow for node width " + std::to_string(d_in));
  }
  const std::size_t d_e = params.U.rows() - 2 * d_in;
  if (edges.cols() != d_e || edges.rows() != m) {
    throw DimensionError("egat_layer: edge features " + ad::to_string(edges.shape()) +
                         " do not fit " + std::to_string(m) + " arcs with U " +
                         ad::to_string(params.U.shape()));
  }
  if (params.a.rows() != params.U.cols() || params.a.cols() != 1) {
    throw DimensionError("egat_layer: attention vector " + ad::to_string(params.a.shape()) +
                         " does not fit U " + ad::to_string(params.U.shape()));
  }
  if (params.A.defined() && params.A.rows() != params.U.rows()) {
    throw DimensionError("egat_layer: edge update A " + ad::to_string(params.A.shape()) +
                         " does not fit concat width " + std::to_string(params.U.rows()));
  }

  std::vector<std::size_t> dst(m + n);
  std::vector<std::size_t> src(m + n);
  for (std::size_t k = 0; k < m; ++k) {
    if (arcs[k].src >= n || arcs[k].dst >= n) {
      throw std::out_of_range("egat_layer: arc " + std::to_string(k) + " endpoint outside " +
                              std::to_string(n) + " nodes");
    }
    dst[k] = arcs[k].dst;
    src[k] = arcs[k].src;
  }
  for (std::size_t i = 0; i < n; ++i) dst[m + i] = src[m + i] = i;

  const ad::Tensor loop_edges = ad::Tensor::zeros({n, d_e});
  const ad::Tensor all_edges = m > 0 ? ad::stack_rows({edges, loop_edges}) : loop_edges;
  const ad::Tensor concat =
      ad::concat_columns({ad::gather_rows(nodes, dst), all_edges, ad::gather_rows(nodes, src)});

  // a^T U x is evaluated as x (U a); the two orders agree up to rounding.
  const ad::Tensor scores = ad::leaky_relu(ad::matmul(concat, ad::matmul(params.U, params.a)),
                                           options.slope);
  EgatOutput out;
  out.alpha = ad::segment_softmax(scores, dst, n);
  const ad::Tensor transformed = ad::matmul(nodes, params.W);
  out.nodes = ad::segment_sum(ad::mul_column(ad::gather_rows(transformed, src), out.alpha), dst, n);

  if (params.A.defined()) {
    std::vector<std::size_t> rows;
    if (options.edge_rows) {
      rows = *options.edge_rows;
      for (std::size_t r : rows)
        if (r >= m) throw std::out_of_range("egat_layer: edge row outside arc list");
    } else {
      rows.resize(m);
      std::iota(rows.begin(), rows.end(), 0);
    }
    out.edges = rows.empty() ? ad::Tensor::zeros({0, params.A.cols()})
                             : ad::matmul(ad::gather_rows(concat, rows), params.A);
  }
  out.alpha_dst = std::move(dst);
  return out;
}

EgatStackOutput stack_egat(const ad::Tensor& nodes, const ad::Tensor& edges,
                           std::span<const Arc> arcs, std::span<const EgatParams> layers,
                           double slope) {
  if (layers.empty()) throw std::invalid_argument("stack_egat: need at least one layer");
  EgatStackOutput out;
  out.nodes = nodes;
  out.edges = edges;
  for (const auto& layer : layers) {
    EgatOutput step = egat_layer(out.nodes, out.edges, arcs, layer, {slope, std::nullopt});
    out.nodes = step.nodes;
    out.edges = step.edges;
    out.alphas.push_back(step.alpha);
  }
  return out;
}

}  // namespace hence::egat
