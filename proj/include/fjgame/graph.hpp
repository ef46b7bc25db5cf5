#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fjgame/error.hpp"
#include "fjgame/random.hpp"

namespace fjgame {

using Index = Eigen::Index;

struct Edge {
  Index u = 0;
  Index v = 0;
  double w = 1.0;
};

struct Neighbor {
  Index node = 0;
  double w = 0.0;
};

/// Undirected graph with nonnegative weights. Immutable after construction.
///
/// Self-loops, negative or non-finite weights, out-of-range endpoints and
/// repeated unordered pairs are rejected; duplicates are never summed.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(Index n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)), adjacency_(n) {
    detail::require(n >= 0, ErrorKind::InvalidGraph, "negative node count");
    std::set<std::pair<Index, Index>> seen;
    for (Edge& e : edges_) {
      detail::require(e.u >= 0 && e.u < n && e.v >= 0 && e.v < n, ErrorKind::InvalidGraph,
                      "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") out of range for n=" +
                          std::to_string(n));
      detail::require(e.u != e.v, ErrorKind::InvalidGraph, "self-loop at node " + std::to_string(e.u));
      detail::require(std::isfinite(e.w) && e.w >= 0.0, ErrorKind::InvalidGraph,
                      "edge weight must be finite and >= 0");
      if (e.u > e.v) std::swap(e.u, e.v);
      detail::require(seen.emplace(e.u, e.v).second, ErrorKind::InvalidGraph,
                      "duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
      adjacency_[e.u].push_back({e.v, e.w});
      adjacency_[e.v].push_back({e.u, e.w});
    }
    for (auto& list : adjacency_) {
      std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }
  }

  Index size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(Index i) const { return adjacency_[static_cast<std::size_t>(i)]; }

  double degree(Index i) const {
    double d = 0.0;
    for (const Neighbor& nb : neighbors(i)) d += nb.w;
    return d;
  }

  Eigen::MatrixXd weight_matrix() const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_, n_);
    for (const Edge& e : edges_) {
      w(e.u, e.v) = e.w;
      w(e.v, e.u) = e.w;
    }
    return w;
  }

  /// Returns a copy with every weight multiplied by `factor` (> 0).
  WeightedGraph scaled(double factor) const {
    std::vector<Edge> edges = edges_;
    for (Edge& e : edges) e.w *= factor;
    return WeightedGraph(n_, std::move(edges));
  }

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// L = D - W.
inline Eigen::MatrixXd laplacian(const WeightedGraph& g) {
  const Index n = g.size();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    lap(e.u, e.u) += e.w;
    lap(e.v, e.v) += e.w;
    lap(e.u, e.v) -= e.w;
    lap(e.v, e.u) -= e.w;
  }
  return lap;
}

/// Laplacian of the subgraph that keeps only the edges incident to `i`.
inline Eigen::MatrixXd restricted_laplacian(const WeightedGraph& g, Index i) {
  detail::require(i >= 0 && i < g.size(), ErrorKind::InvalidArgument, "node index out of range");
  const Index n = g.size();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Neighbor& nb : g.neighbors(i)) {
    lap(i, i) += nb.w;
    lap(nb.node, nb.node) += nb.w;
    lap(i, nb.node) -= nb.w;
    lap(nb.node, i) -= nb.w;
  }
  return lap;
}

/// L x computed from the edge list in O(n + m).
inline Eigen::VectorXd laplacian_apply(const WeightedGraph& g, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.size());
  for (const Edge& e : g.edges()) {
    const double flow = e.w * (x(e.u) - x(e.v));
    out(e.u) += flow;
    out(e.v) -= flow;
  }
  return out;
}

namespace detail {

/// Flips `v` so that its largest-magnitude entry (lowest index on ties) is positive.
inline void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Index best = 0;
  for (Index k = 1; k < v.size(); ++k) {
    if (std::abs(v(k)) > std::abs(v(best)) * (1.0 + 1e-12)) best = k;
  }
  if (v.size() > 0 && v(best) < 0.0) v = -v;
}

}  // namespace detail

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // nondecreasing
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

/// Eigendecomposition of a symmetric matrix. Each eigenvector is normalised
/// so its largest-magnitude entry is positive.
inline SpectralDecomposition spectral_decomposition(const Eigen::MatrixXd& m, double tol = 1e-8) {
  detail::require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.size() > 0) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    detail::require(asym <= tol * scale, ErrorKind::NonSymmetricInput,
                    "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  detail::require(solver.info() == Eigen::Success, ErrorKind::NoConvergence, "symmetric eigensolver failed");
  SpectralDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  for (Index k = 0; k < out.eigenvectors.cols(); ++k) detail::canonical_sign(out.eigenvectors.col(k));
  return out;
}

/// Largest Laplacian eigenvalue (the spectral radius of L).
inline double laplacian_spectral_radius(const WeightedGraph& g) {
  if (g.size() == 0) return 0.0;
  return spectral_decomposition(laplacian(g)).eigenvalues.maxCoeff();
}

/// Connected components, each listed in ascending node order, ordered by
/// their smallest node.
inline std::vector<std::vector<Index>> connected_components(const WeightedGraph& g) {
  const Index n = g.size();
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Index>> components;
  for (Index root = 0; root < n; ++root) {
    if (label[root] >= 0) continue;
    const Index id = static_cast<Index>(components.size());
    std::vector<Index> members{root};
    label[root] = id;
    for (std::size_t head = 0; head < members.size(); ++head) {
      for (const Neighbor& nb : g.neighbors(members[head])) {
        if (nb.w > 0.0 && label[nb.node] < 0) {
          label[nb.node] = id;
          members.push_back(nb.node);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  return components;
}

struct CentralityOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

/// Dominant eigenvector of the weight matrix by power iteration.
///
/// Iterates on W + d_max I (same eigenvectors, no sign oscillation on
/// bipartite graphs) separately inside each connected component. The
/// component with the largest spectral radius carries all mass; exact ties go
/// to the component containing the lowest node index. Output is unit-norm and
/// entrywise nonnegative.
inline Eigen::VectorXd eigenvector_centrality(const WeightedGraph& g, CentralityOptions opts = {}) {
  detail::require(!g.edges().empty(), ErrorKind::InvalidArgument, "eigenvector centrality needs at least one edge");
  const Index n = g.size();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_radius = -1.0;

  for (const std::vector<Index>& comp : connected_components(g)) {
    if (comp.size() < 2) continue;
    const Index k = static_cast<Index>(comp.size());
    std::vector<Index> local(static_cast<std::size_t>(n), -1);
    for (Index a = 0; a < k; ++a) local[comp[a]] = a;
    double shift = 0.0;
    for (Index node : comp) shift = std::max(shift, g.degree(node));
    if (shift <= 0.0) continue;

    Eigen::VectorXd x = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
    Eigen::VectorXd y(k);
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      y = shift * x;
      for (Index a = 0; a < k; ++a) {
        for (const Neighbor& nb : g.neighbors(comp[a])) y(a) += nb.w * x(local[nb.node]);
      }
      y /= y.norm();
      const double change = (y - x).norm();
      x.swap(y);
      if (change <= opts.tol) {
        converged = true;
        break;
      }
    }
    detail::require(converged, ErrorKind::NoConvergence,
                    "power iteration did not reach tol after " + std::to_string(opts.max_iter) + " iterations");

    // Rayleigh quotient of W on the component.
    double radius = 0.0;
    for (Index a = 0; a < k; ++a) {
      double wx = 0.0;
      for (const Neighbor& nb : g.neighbors(comp[a])) wx += nb.w * x(local[nb.node]);
      radius += x(a) * wx;
    }
    if (radius > best_radius * (1.0 + 1e-12) + 1e-300) {
      best_radius = radius;
      best.setZero();
      for (Index a = 0; a < k; ++a) best(comp[a]) = std::max(0.0, x(a));
    }
  }
  best /= best.norm();
  return best;
}

struct CommunityEmbedding {
  Eigen::MatrixXd X;          // n x K one-hot rows
  std::vector<Index> sizes;   // node count per community, in generation order
  std::vector<Index> labels;  // community of each node
};

/// One-hot membership for contiguous communities of the given sizes.
inline CommunityEmbedding one_hot_communities(const std::vector<Index>& sizes) {
  detail::require(!sizes.empty(), ErrorKind::InvalidArgument, "at least one community required");
  for (Index s : sizes) detail::require(s > 0, ErrorKind::InvalidArgument, "community sizes must be positive");
  const Index n = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  const Index k = static_cast<Index>(sizes.size());
  CommunityEmbedding emb{Eigen::MatrixXd::Zero(n, k), sizes, {}};
  emb.labels.reserve(static_cast<std::size_t>(n));
  Index row = 0;
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < sizes[c]; ++r, ++row) {
      emb.X(row, c) = 1.0;
      emb.labels.push_back(c);
    }
  }
  return emb;
}

/// Stochastic blockmodel with unit weights. Nodes are numbered community by
/// community; pairs (u < v) are visited in lexicographic order and each
/// consumes exactly one uniform draw, so output depends only on the seed.
inline std::pair<WeightedGraph, CommunityEmbedding> generate_blockmodel(const std::vector<Index>& sizes, double p_in,
                                                                      double p_out, std::uint64_t seed) {
  detail::require(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0, ErrorKind::InvalidArgument,
                  "edge probabilities must lie in [0,1]");
  CommunityEmbedding emb = one_hot_communities(sizes);
  const Index n = emb.X.rows();
  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const double p = emb.labels[u] == emb.labels[v] ? p_in : p_out;
      if (rng.bernoulli(p)) edges.push_back({u, v, 1.0});
    }
  }
  return {WeightedGraph(n, std::move(edges)), std::move(emb)};
}

}  // namespace fjgame
