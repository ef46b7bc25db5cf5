#include <gtest/gtest.h>

#include <cmath>

#include "fjgame/graph.hpp"
#include "fjgame/random.hpp"
#include "oracles.hpp"

using namespace fjgame;

namespace {

bool throws_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

WeightedGraph star(Index n) {
  std::vector<Edge> edges;
  for (Index i = 1; i < n; ++i) edges.push_back({0, i, 1.0});
  return WeightedGraph(n, edges);
}

}  // namespace

TEST(Graph, RejectsMalformedEdges) {
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidGraph, [] { WeightedGraph(2, {{0, 0, 1.0}}); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidGraph, [] { WeightedGraph(2, {{0, 2, 1.0}}); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidGraph, [] { WeightedGraph(2, {{0, 1, -1.0}}); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidGraph, [] { WeightedGraph(2, {{0, 1, NAN}}); }));
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidGraph, [] { WeightedGraph(3, {{0, 1, 1.0}, {1, 0, 2.0}}); }));
}

TEST(Graph, LaplacianMatchesEntrywiseOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.below(15));
    const auto edges = oracle::random_connected_edges(n, 0.3, rng, true);
    const WeightedGraph g(n, edges);
    const Eigen::MatrixXd l = laplacian(g);
    EXPECT_LE((l - oracle::laplacian(n, edges)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((l * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd x = oracle::gaussian_vector(n, rng);
    EXPECT_LE((laplacian_apply(g, x) - l * x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Graph, RestrictedLaplacianKeepsOnlyIncidentEdges) {
  const WeightedGraph g(4, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 3, 3.0}});
  const Eigen::MatrixXd l1 = restricted_laplacian(g, 1);
  const Eigen::MatrixXd expect = oracle::laplacian(4, {{0, 1, 2.0}, {1, 2, 1.0}});
  EXPECT_LE((l1 - expect).cwiseAbs().maxCoeff(), 0.0);
  // Summing L_i over all i counts every edge twice.
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(4, 4);
  for (Index i = 0; i < 4; ++i) sum += restricted_laplacian(g, i);
  EXPECT_LE((sum - 2.0 * laplacian(g)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Graph, SpectralDecompositionOfK2) {
  const WeightedGraph g(2, {{0, 1, 1.0}});
  const SpectralDecomposition sd = spectral_decomposition(laplacian(g));
  EXPECT_NEAR(sd.eigenvalues(0), 0.0, 1e-14);
  EXPECT_NEAR(sd.eigenvalues(1), 2.0, 1e-14);
  EXPECT_NEAR(std::abs(sd.eigenvectors(0, 1)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(sd.eigenvectors(0, 1), -sd.eigenvectors(1, 1), 1e-14);
}

TEST(Graph, SpectralDecompositionReconstructsAndIsOrthonormal) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(25));
    const WeightedGraph g(n, oracle::random_connected_edges(n, 0.2, rng, true));
    const Eigen::MatrixXd l = laplacian(g);
    const SpectralDecomposition sd = spectral_decomposition(l);
    const Eigen::MatrixXd& u = sd.eigenvectors;
    EXPECT_LE((u * sd.eigenvalues.asDiagonal() * u.transpose() - l).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((u.transpose() * u - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(sd.eigenvalues(0), 0.0, 1e-10);
    for (Index k = 1; k < n; ++k) EXPECT_GE(sd.eigenvalues(k), sd.eigenvalues(k - 1));
    // Eigenvalues agree with a general (unsymmetric) eigensolver.
    Eigen::VectorXd other = Eigen::EigenSolver<Eigen::MatrixXd>(l).eigenvalues().real();
    std::sort(other.begin(), other.end());
    EXPECT_LE((other - sd.eigenvalues).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(laplacian_spectral_radius(g), sd.eigenvalues(n - 1), 1e-10);
  }
}

TEST(Graph, SpectralDecompositionRejectsAsymmetricInput) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  EXPECT_TRUE(throws_kind(ErrorKind::NonSymmetricInput, [&] { spectral_decomposition(m); }));
}

TEST(Graph, ConnectedComponents) {
  const WeightedGraph g(5, {{0, 1, 1.0}, {3, 4, 1.0}});
  const auto comps = connected_components(g);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0], (std::vector<Index>{0, 1}));
  EXPECT_EQ(comps[1], (std::vector<Index>{2}));
  EXPECT_EQ(comps[2], (std::vector<Index>{3, 4}));
}

TEST(Graph, CentralityOfStarPeaksAtCentre) {
  const Eigen::VectorXd c = eigenvector_centrality(star(6));
  Index arg = 0;
  c.maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
  EXPECT_NEAR(c.norm(), 1.0, 1e-12);
  EXPECT_GT(c.minCoeff(), 0.0);
  // Leaves are symmetric.
  for (Index i = 2; i < 6; ++i) EXPECT_NEAR(c(i), c(1), 1e-9);
  // Known star centrality: centre / leaf = sqrt(n - 1).
  EXPECT_NEAR(c(0) / c(1), std::sqrt(5.0), 1e-8);
}

TEST(Graph, CentralityMatchesLeadingEigenvector) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.below(20));
    const WeightedGraph g(n, oracle::random_connected_edges(n, 0.3, rng, true));
    const Eigen::VectorXd c = eigenvector_centrality(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.weight_matrix());
    Eigen::VectorXd lead = es.eigenvectors().col(n - 1);
    if (lead.sum() < 0) lead = -lead;
    EXPECT_LE((c - lead).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Graph, CentralityNeedsEdges) {
  EXPECT_TRUE(throws_kind(ErrorKind::InvalidArgument, [] { eigenvector_centrality(WeightedGraph(3, {})); }));
}

TEST(Graph, BlockmodelIsDeterministicAndRespectsBlocks) {
  const auto [g1, e1] = generate_blockmodel({10, 12}, 0.5, 0.0, 42);
  const auto [g2, e2] = generate_blockmodel({10, 12}, 0.5, 0.0, 42);
  ASSERT_EQ(g1.edges().size(), g2.edges().size());
  for (std::size_t k = 0; k < g1.edges().size(); ++k) {
    EXPECT_EQ(g1.edges()[k].u, g2.edges()[k].u);
    EXPECT_EQ(g1.edges()[k].v, g2.edges()[k].v);
  }
  for (const Edge& e : g1.edges()) EXPECT_EQ(e1.labels[e.u], e1.labels[e.v]);
  EXPECT_EQ(e1.X.rows(), 22);
  EXPECT_EQ(e1.X.cols(), 2);
  EXPECT_LE((e1.X.rowwise().sum() - Eigen::VectorXd::Ones(22)).cwiseAbs().maxCoeff(), 0.0);
  const auto [full, unused] = generate_blockmodel({3, 3}, 1.0, 1.0, 1);
  EXPECT_EQ(full.edges().size(), 15u);
}
