#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fjgame/detection.hpp"
#include "fjgame/error.hpp"
#include "fjgame/fj.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/opinions.hpp"
#include "fjgame/strategic.hpp"

namespace fjgame {

enum class EmbeddingProvenance { OneHotCommunity, SpectralEmbedding, ExternalFile };

struct EmbeddingMatrix {
  Eigen::MatrixXd X;  // n x d, row k = features of node k
  EmbeddingProvenance provenance = EmbeddingProvenance::ExternalFile;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(Eigen::MatrixXd x, EmbeddingProvenance p) : X(std::move(x)), provenance(p) {
    detail::require(X.allFinite(), ErrorKind::InvalidArgument, "embedding contains non-finite entries");
  }
};

/// Columns u_2 ... u_{d+1} of the Laplacian eigenbasis (ascending eigenvalues).
///
/// For a graph with c > 1 components the kernel is c-dimensional and any
/// basis of it is valid; it is fixed to 1/sqrt(n) followed by the component
/// indicators (components ordered by lowest node) Gram-Schmidt orthonormalised
/// in that order, so u_2 separates the first component from the rest by sign.
inline EmbeddingMatrix spectral_embedding(const WeightedGraph& g, Index d) {
  const Index n = g.size();
  detail::require(d >= 1 && d <= n - 1, ErrorKind::InvalidArgument, "spectral embedding dimension must lie in [1, n-1]");
  SpectralDecomposition sd = spectral_decomposition(laplacian(g));
  const auto comps = connected_components(g);
  if (comps.size() > 1) {
    const Index c = static_cast<Index>(comps.size());
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, c);
    basis.col(0).setConstant(1.0);
    for (Index k = 1; k < c; ++k) {
      for (Index v : comps[static_cast<std::size_t>(k - 1)]) basis(v, k) = 1.0;
    }
    for (Index k = 0; k < c; ++k) {
      for (Index j = 0; j < k; ++j) basis.col(k) -= basis.col(j).dot(basis.col(k)) * basis.col(j);
      basis.col(k).normalize();
    }
    sd.eigenvectors.leftCols(c) = basis;
    sd.eigenvalues.head(c).setZero();
  }
  return EmbeddingMatrix(sd.eigenvectors.middleCols(1, d), EmbeddingProvenance::SpectralEmbedding);
}

/// Per-column (x - min) / (max - min); constant columns become 0.
inline Eigen::MatrixXd min_max_normalize(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    if (x.rows() == 0) break;
    const double lo = x.col(c).minCoeff();
    const double hi = x.col(c).maxCoeff();
    if (hi > lo) out.col(c) = (x.col(c).array() - lo) / (hi - lo);
  }
  return out;
}

enum class TorrentVariant { FullyCorrective, GradientStep };

struct TorrentOptions {
  double beta = 0.0;  // corruption fraction bound, in [0, 1/2)
  TorrentVariant variant = TorrentVariant::FullyCorrective;
  double tol = 1e-10;
  std::optional<int> max_iter = std::nullopt;  // default ceil(10 (ln n)^2)
};

struct TorrentResult {
  Eigen::VectorXd w;
  int iterations = 0;
  std::vector<Index> active_set;           // ascending
  std::vector<Index> active_set_sizes;     // per iteration, the set the fit used
  std::vector<double> active_residuals;    // per iteration, ||r_S|| on the new active set
};

/// Number of rows kept by the hard-thresholding step: ceil((1 - beta) n).
inline Index torrent_active_size(Index n, double beta) {
  return n - static_cast<Index>(std::floor(beta * static_cast<double>(n) + 1e-9));
}

inline int torrent_default_iterations(Index n) {
  const double ln = std::log(static_cast<double>(std::max<Index>(n, 2)));
  return std::max(1, static_cast<int>(std::ceil(10.0 * ln * ln)));
}

namespace detail {

/// Indices of the m smallest |r|, ties to the lower index, returned ascending.
inline std::vector<Index> hard_threshold(const Eigen::VectorXd& r, Index m) {
  std::vector<Index> order(static_cast<std::size_t>(r.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(r(a)) < std::abs(r(b)); });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());
  return order;
}

inline Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = x.row(rows[k]);
  return out;
}

inline Eigen::VectorXd select_rows(const Eigen::VectorXd& y, const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Index>(k)) = y(rows[k]);
  return out;
}

}  // namespace detail

/// Robust regression by iterative hard thresholding: fit on the active set,
/// recompute residuals on all rows, keep the ceil((1-beta) n) rows with the
/// smallest |residual|, repeat.
///
/// FullyCorrective refits exactly by least squares. GradientStep takes one
/// step of size 1/||X_bar||_2^2 per iteration (X_bar = min-max normalised X,
/// falling back to X itself when every column is constant). Stops when the
/// residual on the new active set is below tol max(1, ||y||), the weights move
/// by at most tol, the active set repeats (FullyCorrective only), or after
/// max_iter iterations.
inline TorrentResult torrent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TorrentOptions& opts = {}) {
  const Index n = x.rows();
  const Index d = x.cols();
  detail::require(y.size() == n, ErrorKind::DimensionMismatch, "response length must match design rows");
  detail::require(opts.beta >= 0.0 && opts.beta < 0.5, ErrorKind::InvalidArgument, "beta must lie in [0, 1/2)");
  const Index m = torrent_active_size(n, opts.beta);
  detail::require(d >= 1 && m >= d, ErrorKind::InvalidArgument,
                  "active set of " + std::to_string(m) + " rows cannot identify " + std::to_string(d) + " weights");
  const int max_iter = opts.max_iter.value_or(torrent_default_iterations(n));
  const double stop = opts.tol * std::max(1.0, y.norm());

  double step = 0.0;
  if (opts.variant == TorrentVariant::GradientStep) {
    double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(min_max_normalize(x)).singularValues()(0);
    if (norm <= 0.0) norm = Eigen::JacobiSVD<Eigen::MatrixXd>(x).singularValues()(0);
    detail::require(norm > 0.0, ErrorKind::RankDeficientActiveSet, "design matrix is zero");
    step = 1.0 / (norm * norm);
  }

  TorrentResult out;
  out.w = Eigen::VectorXd::Zero(d);
  std::vector<Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Index{0});

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd xs = detail::select_rows(x, active);
    const Eigen::VectorXd ys = detail::select_rows(y, active);
    Eigen::VectorXd w_next;
    if (opts.variant == TorrentVariant::FullyCorrective) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
      detail::require(qr.rank() == d, ErrorKind::RankDeficientActiveSet,
                      "active-set design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(d));
      w_next = qr.solve(ys);
    } else {
      w_next = out.w + step * (xs.transpose() * (ys - xs * out.w));
    }
    const double moved = (w_next - out.w).norm();
    out.w = std::move(w_next);
    out.iterations = it;
    out.active_set_sizes.push_back(static_cast<Index>(active.size()));

    const Eigen::VectorXd r = y - x * out.w;
    std::vector<Index> next = detail::hard_threshold(r, m);
    const double active_res = detail::select_rows(r, next).norm();
    out.active_residuals.push_back(active_res);
    const bool repeated = next == active;
    active = std::move(next);
    if (active_res <= stop || moved <= opts.tol ||
        (repeated && opts.variant == TorrentVariant::FullyCorrective)) {
      break;
    }
  }
  out.active_set = active;
  return out;
}

struct RecoveryResult {
  TrueOpinions s_hat;                  // X v_hat
  ReportedOpinions s_prime_hat;        // reconstructed reports
  StrategicSet s_set_hat;
  Eigen::VectorXd v_hat;
  Eigen::VectorXd diffs;               // |s_hat - s'_hat|
  int iterations = 0;
  std::vector<Index> active_set_sizes;
  bool ambiguous_membership = false;   // k-th and (k+1)-th diffs within 1e-9
};

/// Top-k indices of `scores` (largest first, ties to the lower index).
inline std::vector<Index> top_k_indices(const Eigen::VectorXd& scores, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) > scores(b); });
  order.resize(static_cast<std::size_t>(std::min<Index>(k, scores.size())));
  return order;
}

/// Recover the deviators: reconstruct s', regress it on X robustly with
/// beta = k/n, and flag the k nodes whose reports sit furthest from X v_hat.
inline RecoveryResult recover_deviators(const Eigen::MatrixXd& x, const WeightedGraph& g,
                                        const SusceptibilityProfile& alpha, const ExpressedOpinions& z_prime, Index k,
                                        TorrentVariant variant = TorrentVariant::FullyCorrective) {
  const Index n = g.size();
  detail::require(x.rows() == n, ErrorKind::DimensionMismatch, "embedding rows must match node count");
  detail::require(k >= 1 && k < n, ErrorKind::InvalidArgument, "k must lie in [1, n)");
  RecoveryResult out;
  out.s_prime_hat = reconstruct_intrinsic(g, alpha, z_prime);
  TorrentOptions opts;
  opts.beta = static_cast<double>(k) / static_cast<double>(n);
  opts.variant = variant;
  const TorrentResult fit = torrent(x, out.s_prime_hat.values(), opts);
  out.v_hat = fit.w;
  out.iterations = fit.iterations;
  out.active_set_sizes = fit.active_set_sizes;
  out.s_hat = TrueOpinions(x * fit.w);
  out.diffs = (out.s_hat.values() - out.s_prime_hat.values()).cwiseAbs();
  const std::vector<Index> top = top_k_indices(out.diffs, k);
  out.s_set_hat = StrategicSet(top, n);
  if (k < n) {
    std::vector<double> sorted(out.diffs.data(), out.diffs.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    out.ambiguous_membership = sorted[static_cast<std::size_t>(k - 1)] - sorted[static_cast<std::size_t>(k)] <= 1e-9;
  }
  return out;
}

enum class CertificateMethod { BruteForce, BlockmodelClosedForm };

struct SscSssCertificate {
  double gamma = 0.0;
  Index small_size = 0;  // |S| for the smoothness constant (gamma n, rounded)
  Index large_size = 0;  // |S| for the convexity constant ((1 - gamma) n, rounded)
  double xi = 0.0;       // min over |S| = large_size of lambda_min(X_S^T X_S)
  double Xi = 0.0;       // max over |S| = small_size of lambda_max(X_S^T X_S)
  double condition_value = std::numeric_limits<double>::infinity();  // 4 sqrt(Xi / xi)
  bool certified = false;
  CertificateMethod method = CertificateMethod::BruteForce;
};

namespace detail {

inline Index rounded_count(double value) { return std::max<Index>(1, static_cast<Index>(std::llround(value))); }

inline void finish_certificate(SscSssCertificate& c) {
  c.condition_value = c.xi > 0.0 ? 4.0 * std::sqrt(c.Xi / c.xi) : std::numeric_limits<double>::infinity();
  c.certified = c.condition_value < 1.0;
}

inline std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd& gram) {
  const Index d = gram.rows();
  if (d == 1) return {gram(0, 0), gram(0, 0)};
  if (d == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.compute(Eigen::Matrix2d(gram), Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
  }
  if (d == 3) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.compute(Eigen::Matrix3d(gram), Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(2)};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(d - 1)};
}

/// Visits every size-`size` row subset; calls visit(gram of the subset).
template <typename Visit>
void for_each_subset_gram(const Eigen::MatrixXd& x, Index size, Visit&& visit) {
  const Index n = x.rows();
  const Index d = x.cols();
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(size + 1), Eigen::MatrixXd::Zero(d, d));
  std::vector<Index> chosen(static_cast<std::size_t>(size));
  // Depth-first enumeration; partial[depth] holds the gram of the first `depth` chosen rows.
  auto recurse = [&](auto&& self, Index depth, Index start) -> void {
    if (depth == size) {
      visit(partial[static_cast<std::size_t>(depth)]);
      return;
    }
    for (Index r = start; r <= n - (size - depth); ++r) {
      chosen[static_cast<std::size_t>(depth)] = r;
      partial[static_cast<std::size_t>(depth + 1)] =
          partial[static_cast<std::size_t>(depth)] + x.row(r).transpose() * x.row(r);
      self(self, depth + 1, r + 1);
    }
  };
  recurse(recurse, 0, 0);
}

}  // namespace detail

/// Exact SSC/SSS constants by enumerating every row subset (n <= 20).
inline SscSssCertificate ssc_sss_bruteforce(const Eigen::MatrixXd& x, double gamma) {
  const Index n = x.rows();
  detail::require(n <= 20, ErrorKind::TooLarge, "subset enumeration is limited to n <= 20");
  detail::require(gamma > 0.0 && gamma < 1.0, ErrorKind::InvalidArgument, "gamma must lie in (0,1)");
  detail::require(x.cols() >= 1, ErrorKind::InvalidArgument, "embedding needs at least one column");
  SscSssCertificate c;
  c.gamma = gamma;
  c.method = CertificateMethod::BruteForce;
  c.small_size = std::min(n, detail::rounded_count(gamma * static_cast<double>(n)));
  c.large_size = std::min(n, detail::rounded_count((1.0 - gamma) * static_cast<double>(n)));

  double smooth = 0.0;
  detail::for_each_subset_gram(x, c.small_size, [&](const Eigen::MatrixXd& gram) {
    smooth = std::max(smooth, detail::extreme_eigenvalues(gram).second);
  });
  double convex = std::numeric_limits<double>::infinity();
  detail::for_each_subset_gram(x, c.large_size, [&](const Eigen::MatrixXd& gram) {
    convex = std::min(convex, detail::extreme_eigenvalues(gram).first);
  });
  c.Xi = smooth;
  c.xi = std::max(0.0, convex);
  detail::finish_certificate(c);
  return c;
}

/// SSC/SSS constants for one-hot community features, by counting.
///
/// X_S^T X_S is diag(|V_k cap S|), so the worst small subset piles into the
/// largest community, Xi = min(gamma n, n_1), and the worst large subset
/// drops all excluded rows from the smallest community,
/// xi = max(0, n_K - (n - |S|)).
inline SscSssCertificate blockmodel_constants(const std::vector<Index>& sizes, double gamma) {
  detail::require(!sizes.empty(), ErrorKind::InvalidArgument, "at least one community required");
  detail::require(gamma > 0.0 && gamma < 1.0, ErrorKind::InvalidArgument, "gamma must lie in (0,1)");
  for (Index s : sizes) detail::require(s > 0, ErrorKind::InvalidArgument, "community sizes must be positive");
  const Index n = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  const Index largest = *std::max_element(sizes.begin(), sizes.end());
  const Index smallest = *std::min_element(sizes.begin(), sizes.end());
  SscSssCertificate c;
  c.gamma = gamma;
  c.method = CertificateMethod::BlockmodelClosedForm;
  c.small_size = std::min(n, detail::rounded_count(gamma * static_cast<double>(n)));
  c.large_size = std::min(n, detail::rounded_count((1.0 - gamma) * static_cast<double>(n)));
  c.Xi = static_cast<double>(std::min(c.small_size, largest));
  c.xi = static_cast<double>(std::max<Index>(0, smallest - (n - c.large_size)));
  detail::finish_certificate(c);
  return c;
}

/// Largest strategic-set size (strict bound) for which perfect recovery is
/// guaranteed with one-hot community features: n_1/17 for two communities,
/// n/(16K + 1) for K >= 3 provided n_K > (16K/(16K+1)) n/K.
inline double blockmodel_recovery_limit(std::vector<Index> sizes) {
  detail::require(sizes.size() >= 2, ErrorKind::InvalidArgument, "need at least two communities");
  for (Index s : sizes) detail::require(s > 0, ErrorKind::InvalidArgument, "community sizes must be positive");
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), Index{0}));
  if (sizes.size() == 2) return static_cast<double>(sizes[0]) / 17.0;
  const double k = static_cast<double>(sizes.size());
  detail::require(static_cast<double>(sizes.back()) > (16.0 * k / (16.0 * k + 1.0)) * n / k,
                  ErrorKind::SizeConditionViolated,
                  "smallest community too small: need n_K > (16K/(16K+1)) n/K");
  return n / (16.0 * k + 1.0);
}

}  // namespace fjgame
