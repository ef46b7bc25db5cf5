#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fjgame/error.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/opinions.hpp"

namespace fjgame {

/// The Friedkin-Johnsen response matrix B = ((I - A)L + A)^{-1} A for a fixed
/// graph and susceptibility profile, together with its factorization.
///
/// (I - A)L + A = (I - A)(L + diag(alpha~)), and K = L + diag(alpha~) is SPD
/// for any alpha in (0,1), so every solve goes through a Cholesky factor of K:
/// B = K^{-1} diag(alpha~). Immutable and safe to share across threads.
class ResponseMatrix {
 public:
  static constexpr double kResidualTol = 1e-8;

  ResponseMatrix(WeightedGraph graph, SusceptibilityProfile alpha)
      : graph_(std::move(graph)), alpha_(std::move(alpha)), laplacian_(fjgame::laplacian(graph_)) {
    const Index n = graph_.size();
    detail::require(alpha_.size() == n, ErrorKind::DimensionMismatch,
                    "susceptibility profile has " + std::to_string(alpha_.size()) + " entries, graph has " +
                        std::to_string(n) + " nodes");
    Eigen::MatrixXd k = laplacian_;
    k.diagonal() += alpha_.alpha_tilde();
    factor_.compute(k);
    detail::require(factor_.info() == Eigen::Success, ErrorKind::SingularSystem,
                    "Cholesky factorization of L + diag(alpha~) failed");
    b_ = factor_.solve(Eigen::MatrixXd(alpha_.alpha_tilde().asDiagonal()));

    // ((I - A)L + A) B - A, scaled per row to stay relative.
    if (n > 0) {
      const Eigen::VectorXd one_minus = 1.0 - alpha_.alpha().array();
      Eigen::MatrixXd res = one_minus.asDiagonal() * (laplacian_ * b_);
      res += alpha_.alpha().asDiagonal() * b_;
      res.diagonal() -= alpha_.alpha();
      residual_ = res.cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, laplacian_.cwiseAbs().maxCoeff());
      detail::require(residual_ <= kResidualTol * scale, ErrorKind::SingularSystem,
                      "response matrix residual " + std::to_string(residual_) + " too large");
    }
  }

  ResponseMatrix(const WeightedGraph& graph, double shared_alpha)
      : ResponseMatrix(graph, SusceptibilityProfile::shared(graph.size(), shared_alpha)) {}

  Index size() const { return graph_.size(); }
  const Eigen::MatrixXd& matrix() const { return b_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  const WeightedGraph& graph() const { return graph_; }
  const SusceptibilityProfile& susceptibility() const { return alpha_; }
  double residual() const { return residual_; }

  /// B x, by a triangular solve against the cached factor.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    check_size(x.size());
    return factor_.solve((alpha_.alpha_tilde().array() * x.array()).matrix());
  }

  /// B^{-1} x = A^{-1}((I - A)L + A) x = x + diag(1/alpha~) L x.
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& x) const {
    check_size(x.size());
    return x + (laplacian_apply(graph_, x).array() / alpha_.alpha_tilde().array()).matrix();
  }

  void check_size(Index m) const {
    detail::require(m == size(), ErrorKind::DimensionMismatch,
                    "vector has " + std::to_string(m) + " entries, graph has " + std::to_string(size()) + " nodes");
  }

 private:
  WeightedGraph graph_;
  SusceptibilityProfile alpha_;
  Eigen::MatrixXd laplacian_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::MatrixXd b_;
  double residual_ = 0.0;
};

/// Equilibrium expressed opinions z = B s for (true or reported) intrinsic s.
template <OpinionRole Role>
  requires IntrinsicRole<Role>
ExpressedOpinions fj_equilibrium(const ResponseMatrix& b, const OpinionProfile<Role>& s) {
  return ExpressedOpinions(b.apply(s.values()));
}

template <OpinionRole Role>
  requires IntrinsicRole<Role>
ExpressedOpinions fj_equilibrium(const WeightedGraph& g, const SusceptibilityProfile& alpha,
                                 const OpinionProfile<Role>& s) {
  return fj_equilibrium(ResponseMatrix(g, alpha), s);
}

struct DynamicsResult {
  ExpressedOpinions z;
  int iterations = 0;
};

/// Synchronous best-response iteration
///   z_i <- (alpha_i s_i + (1 - alpha_i) sum_j w_ij z_j) / (alpha_i + (1 - alpha_i) d_i)
/// until the sup-norm change is at most `tol`. Its fixed point is B s.
template <OpinionRole Role>
  requires IntrinsicRole<Role>
DynamicsResult best_response_dynamics(const WeightedGraph& g, const SusceptibilityProfile& alpha,
                                      const OpinionProfile<Role>& s, const Eigen::VectorXd& z0, double tol = 1e-12,
                                      int max_iter = 100000) {
  const Index n = g.size();
  detail::require(tol > 0.0, ErrorKind::InvalidArgument, "tol must be positive");
  detail::require(s.size() == n && z0.size() == n && alpha.size() == n, ErrorKind::DimensionMismatch,
                  "dynamics inputs must all have one entry per node");
  Eigen::VectorXd z = z0;
  Eigen::VectorXd next(n);
  for (int it = 1; it <= max_iter; ++it) {
    for (Index i = 0; i < n; ++i) {
      double pull = 0.0;
      double deg = 0.0;
      for (const Neighbor& nb : g.neighbors(i)) {
        pull += nb.w * z(nb.node);
        deg += nb.w;
      }
      const double a = alpha[i];
      next(i) = (a * s[i] + (1.0 - a) * pull) / (a + (1.0 - a) * deg);
    }
    const double change = (next - z).cwiseAbs().maxCoeff();
    z.swap(next);
    if (change <= tol) return {ExpressedOpinions(std::move(z)), it};
  }
  throw Error(ErrorKind::NoConvergence,
              "best-response dynamics did not converge in " + std::to_string(max_iter) + " iterations");
}

/// c_i = (1 - alpha_i) sum_{j~i} w_ij (z_i - z_j)^2 + alpha_i (z_i - s_i)^2,
/// always charged against the truthful intrinsic opinion.
inline double agent_cost(Index i, const ExpressedOpinions& z, const TrueOpinions& s_true, const WeightedGraph& g,
                         const SusceptibilityProfile& alpha) {
  const Index n = g.size();
  detail::require(z.size() == n && s_true.size() == n && alpha.size() == n, ErrorKind::DimensionMismatch,
                  "cost inputs must all have one entry per node");
  detail::require(i >= 0 && i < n, ErrorKind::InvalidArgument, "agent index out of range");
  double social = 0.0;
  for (const Neighbor& nb : g.neighbors(i)) {
    const double d = z[i] - z[nb.node];
    social += nb.w * d * d;
  }
  const double own = z[i] - s_true[i];
  return (1.0 - alpha[i]) * social + alpha[i] * own * own;
}

inline double total_cost(const ExpressedOpinions& z, const TrueOpinions& s_true, const WeightedGraph& g,
                         const SusceptibilityProfile& alpha) {
  double total = 0.0;
  for (Index i = 0; i < g.size(); ++i) total += agent_cost(i, z, s_true, g, alpha);
  return total;
}

inline double polarization(const Eigen::VectorXd& z) {
  if (z.size() == 0) return 0.0;
  return (z.array() - z.mean()).square().sum();
}

/// D(z) = z^T L z, i.e. each unordered edge counted once.
inline double disagreement(const WeightedGraph& g, const Eigen::VectorXd& z) {
  double d = 0.0;
  for (const Edge& e : g.edges()) {
    const double diff = z(e.u) - z(e.v);
    d += e.w * diff * diff;
  }
  return d;
}

struct MetricsReport {
  double polarization = 0.0;
  double disagreement = 0.0;
  double total_cost = 0.0;
  double mean_opinion = 0.0;
};

inline MetricsReport metrics(const ExpressedOpinions& z, const TrueOpinions& s_true, const WeightedGraph& g,
                             const SusceptibilityProfile& alpha) {
  MetricsReport r;
  r.total_cost = total_cost(z, s_true, g, alpha);
  r.polarization = polarization(z.values());
  r.disagreement = disagreement(g, z.values());
  r.mean_opinion = z.size() > 0 ? z.values().mean() : 0.0;
  return r;
}

inline constexpr double kDegenerateCost = 1e-14;

/// Price of Misreporting C(z') / C(z).
inline double pom(const ExpressedOpinions& z_corrupted, const ExpressedOpinions& z_truthful, const TrueOpinions& s_true,
                  const WeightedGraph& g, const SusceptibilityProfile& alpha) {
  const double baseline = total_cost(z_truthful, s_true, g, alpha);
  detail::require(baseline > kDegenerateCost, ErrorKind::DegenerateBaseline,
                  "truthful equilibrium has (near) zero cost; PoM undefined");
  return total_cost(z_corrupted, s_true, g, alpha) / baseline;
}

/// (lambda_n + 4 a~)(lambda_n + a~)^2 / a~^5 for shared alpha and S = [n].
inline double pom_upper_bound_shared(double lambda_n, double alpha_tilde) {
  detail::require(alpha_tilde > 0.0, ErrorKind::InvalidArgument, "alpha_tilde must be positive");
  return (lambda_n + 4.0 * alpha_tilde) * (lambda_n + alpha_tilde) * (lambda_n + alpha_tilde) /
         std::pow(alpha_tilde, 5);
}

/// Heterogeneous-susceptibility bound
///   ((1 - a_min)/(1 - a_max)) (lambda_n + 4 t_max)(lambda_n + t_max)^2 / t_min
/// with t_min = a_min/(1 - a_max), t_max = a_max/(1 - a_min). The denominator is
/// t_min to the first power, exactly as the bound is stated.
inline double pom_upper_bound_hetero(double lambda_n, double alpha_min, double alpha_max) {
  detail::require(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max < 1.0, ErrorKind::InvalidArgument,
                  "need 0 < alpha_min <= alpha_max < 1");
  const double t_min = alpha_min / (1.0 - alpha_max);
  const double t_max = alpha_max / (1.0 - alpha_min);
  return (1.0 - alpha_min) / (1.0 - alpha_max) * (lambda_n + 4.0 * t_max) * (lambda_n + t_max) *
         (lambda_n + t_max) / t_min;
}

/// Q = B L B + a~ (I - 2B + B^2) and what is known about it, for shared alpha.
struct QMatrixReport {
  Eigen::MatrixXd q;
  Eigen::VectorXd eigenvalues;              // computed, ascending
  Eigen::VectorXd laplacian_eigenvalues;    // ascending
  Eigen::VectorXd predicted_eigenvalues;    // a~ lambda_i / (lambda_i + a~), ascending
  Eigen::VectorXd stated_eigenvalues;       // a~^2 / (lambda_i + a~), ascending
  double spectrum_error = 0.0;              // max |computed - predicted|
  double stated_spectrum_error = 0.0;       // max |computed - stated|
};

/// Builds Q and compares its spectrum with two closed forms.
///
/// In the Laplacian eigenbasis B has eigenvalues b = a~/(lambda + a~), so Q has
/// lambda b^2 + a~ (1 - b)^2 = a~ lambda / (lambda + a~). The form
/// a~^2/(lambda + a~) is reported alongside; it does not vanish at lambda = 0
/// although constant s has zero cost, and is kept only for comparison.
inline QMatrixReport q_matrix_oracle(const ResponseMatrix& b) {
  detail::require(b.susceptibility().is_shared(), ErrorKind::SharedAlphaRequired, "Q matrix needs shared alpha");
  const Index n = b.size();
  QMatrixReport r;
  if (n == 0) return r;
  const double at = b.susceptibility().alpha_tilde()(0);
  const Eigen::MatrixXd& bm = b.matrix();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  r.q = bm * b.laplacian() * bm + at * (id - 2.0 * bm + bm * bm);
  r.q = 0.5 * (r.q + r.q.transpose());
  r.eigenvalues = spectral_decomposition(r.q).eigenvalues;
  r.laplacian_eigenvalues = spectral_decomposition(b.laplacian()).eigenvalues;
  const Eigen::ArrayXd lam = r.laplacian_eigenvalues.array().max(0.0);
  r.predicted_eigenvalues = (at * lam / (lam + at)).matrix();
  r.stated_eigenvalues = (at * at / (lam + at)).matrix();
  std::sort(r.predicted_eigenvalues.begin(), r.predicted_eigenvalues.end());
  std::sort(r.stated_eigenvalues.begin(), r.stated_eigenvalues.end());
  r.spectrum_error = (r.eigenvalues - r.predicted_eigenvalues).cwiseAbs().maxCoeff();
  r.stated_spectrum_error = (r.eigenvalues - r.stated_eigenvalues).cwiseAbs().maxCoeff();
  return r;
}

/// s^T Q s for a shared-alpha response matrix.
inline double q_quadratic_form(const QMatrixReport& q, const Eigen::VectorXd& s) { return s.dot(q.q * s); }

}  // namespace fjgame
