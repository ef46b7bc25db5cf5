#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fjgame/error.hpp"
#include "fjgame/fj.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/opinions.hpp"

namespace fjgame {

/// Sorted, duplicate-free set of strategic agents.
class StrategicSet {
 public:
  StrategicSet() = default;

  StrategicSet(std::vector<Index> members, Index n) : members_(std::move(members)), mask_(static_cast<std::size_t>(n)) {
    std::sort(members_.begin(), members_.end());
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const Index i = members_[k];
      detail::require(i >= 0 && i < n, ErrorKind::InvalidArgument,
                      "strategic agent " + std::to_string(i) + " out of range");
      detail::require(k == 0 || members_[k - 1] != i, ErrorKind::InvalidArgument,
                      "strategic agent " + std::to_string(i) + " listed twice");
      mask_[static_cast<std::size_t>(i)] = true;
    }
  }

  static StrategicSet all(Index n) {
    std::vector<Index> m(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = i;
    return StrategicSet(std::move(m), n);
  }

  const std::vector<Index>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  Index universe() const { return static_cast<Index>(mask_.size()); }
  bool contains(Index i) const { return mask_[static_cast<std::size_t>(i)]; }

  friend bool operator==(const StrategicSet& a, const StrategicSet& b) { return a.members_ == b.members_; }

 private:
  std::vector<Index> members_;
  std::vector<bool> mask_;
};

/// Corollary-form linear system over the strategic agents: row k is agent
/// i = row_index[k], with full row e_i^T T_i where
///   T_i = (1 - alpha_i) B^T L_i B + alpha_i B^T e_i e_i^T B.
struct NashSystem {
  Eigen::MatrixXd t_rows;   // |S| x n
  Eigen::MatrixXd t_tilde;  // |S| x |S|, columns restricted to S
  Eigen::VectorXd y;        // alpha_i B_ii s_i
  Eigen::VectorXd y_tilde;  // y minus the honest columns times s
  std::vector<Index> row_index;
};

namespace detail {

/// e_i^T T_i in O(deg(i) n): (L_i B e_i)^T B touches only i and its neighbours.
inline Eigen::RowVectorXd nash_row(const ResponseMatrix& b, Index i) {
  const Eigen::MatrixXd& bm = b.matrix();
  const double a = b.susceptibility()[i];
  const double b_ii = bm(i, i);
  Eigen::RowVectorXd row = (a * b_ii) * bm.row(i);
  double self = 0.0;
  for (const Neighbor& nb : b.graph().neighbors(i)) {
    const double flow = nb.w * (b_ii - bm(nb.node, i));
    self += flow;
    row.noalias() -= ((1.0 - a) * flow) * bm.row(nb.node);
  }
  row.noalias() += ((1.0 - a) * self) * bm.row(i);
  return row;
}

/// c_i as a function of the expressed profile, touching only i's neighbourhood.
inline double local_cost(const ResponseMatrix& b, Index i, const Eigen::VectorXd& z, double s_i) {
  double social = 0.0;
  for (const Neighbor& nb : b.graph().neighbors(i)) {
    const double d = z(i) - z(nb.node);
    social += nb.w * d * d;
  }
  const double a = b.susceptibility()[i];
  const double own = z(i) - s_i;
  return (1.0 - a) * social + a * own * own;
}

}  // namespace detail

inline NashSystem build_system(const ResponseMatrix& b, const TrueOpinions& s, const StrategicSet& set) {
  const Index n = b.size();
  b.check_size(s.size());
  detail::require(set.universe() == n, ErrorKind::DimensionMismatch, "strategic set built for a different node count");
  detail::require(!set.empty(), ErrorKind::InvalidArgument, "strategic set must be nonempty");
  const Index m = static_cast<Index>(set.size());
  NashSystem sys;
  sys.row_index = set.members();
  sys.t_rows.resize(m, n);
  sys.y.resize(m);
  for (Index k = 0; k < m; ++k) {
    const Index i = sys.row_index[static_cast<std::size_t>(k)];
    sys.t_rows.row(k) = detail::nash_row(b, i);
    sys.y(k) = b.susceptibility()[i] * b.matrix()(i, i) * s[i];
  }
  sys.t_tilde.resize(m, m);
  for (Index k = 0; k < m; ++k) sys.t_tilde.col(k) = sys.t_rows.col(sys.row_index[static_cast<std::size_t>(k)]);
  sys.y_tilde = sys.y;
  for (Index j = 0; j < n; ++j) {
    if (!set.contains(j)) sys.y_tilde.noalias() -= s[j] * sys.t_rows.col(j);
  }
  return sys;
}

enum class Uniqueness { Unique, NonUnique, None };

inline const char* to_string(Uniqueness u) {
  switch (u) {
    case Uniqueness::Unique: return "unique";
    case Uniqueness::NonUnique: return "non-unique";
    case Uniqueness::None: return "none";
  }
  return "?";
}

struct StrategicOutcome {
  ReportedOpinions s_prime;
  ExpressedOpinions z_prime;
  double residual = 0.0;       // ||T~ x - y~||_2
  double max_gradient = 0.0;   // max_{i in S} |dc_i / ds'_i|
  double condition = 1.0;      // singular-value ratio of T~
  Uniqueness uniqueness = Uniqueness::None;  // None: no strategic agents
};

struct FirstOrderCheck {
  double max_gradient = 0.0;
  double max_fd_discrepancy = 0.0;
};

/// Analytic gradients dc_i/ds'_i for i in S,
///   2 [ (1 - alpha_i) (B e_i)^T L_i z' + alpha_i B_ii (z'_i - s_i) ],
/// and their largest disagreement with central finite differences.
inline FirstOrderCheck check_first_order_conditions(const ResponseMatrix& b, const ReportedOpinions& s_prime,
                                                    const TrueOpinions& s, const StrategicSet& set,
                                                    double fd_step = 1e-6) {
  b.check_size(s_prime.size());
  b.check_size(s.size());
  const Eigen::MatrixXd& bm = b.matrix();
  const Eigen::VectorXd z = b.apply(s_prime.values());
  FirstOrderCheck out;
  for (Index i : set.members()) {
    const double a = b.susceptibility()[i];
    const double b_ii = bm(i, i);
    double social = 0.0;
    for (const Neighbor& nb : b.graph().neighbors(i)) {
      social += nb.w * (b_ii - bm(nb.node, i)) * (z(i) - z(nb.node));
    }
    const double grad = 2.0 * ((1.0 - a) * social + a * b_ii * (z(i) - s[i]));

    const double h = fd_step * std::max(1.0, std::abs(s_prime[i]));
    const Eigen::VectorXd col = bm.col(i);
    const double c_plus = detail::local_cost(b, i, z + h * col, s[i]);
    const double c_minus = detail::local_cost(b, i, z - h * col, s[i]);
    const double fd = (c_plus - c_minus) / (2.0 * h);
    const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * std::max(c_plus, c_minus) / h;

    out.max_gradient = std::max(out.max_gradient, std::abs(grad));
    const double discrepancy = std::max(0.0, std::abs(grad - fd) - rounding) / std::max(1.0, std::abs(grad));
    out.max_fd_discrepancy = std::max(out.max_fd_discrepancy, discrepancy);
  }
  return out;
}

/// Largest |dc_i/ds'_i| over S; throws GradientMismatch when the analytic
/// gradient and finite differences disagree by more than 1e-4.
inline double verify_nash(const ResponseMatrix& b, const ReportedOpinions& s_prime, const TrueOpinions& s,
                          const StrategicSet& set) {
  const FirstOrderCheck c = check_first_order_conditions(b, s_prime, s, set);
  detail::require(c.max_fd_discrepancy <= 1e-4, ErrorKind::GradientMismatch,
                  "analytic and finite-difference gradients disagree by " + std::to_string(c.max_fd_discrepancy));
  return c.max_gradient;
}

inline constexpr double kConditionLimit = 1e12;

/// Solves T~ x = y~ and assembles s' (honest entries copied from s) and z' = B s'.
inline StrategicOutcome solve_nash(const NashSystem& sys, const ResponseMatrix& b, const TrueOpinions& s,
                                   const StrategicSet& set) {
  b.check_size(s.size());
  detail::require(sys.row_index == set.members(), ErrorKind::InvalidArgument,
                  "system was built for a different strategic set");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.t_tilde, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;

  StrategicOutcome out;
  out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  out.uniqueness = out.condition <= kConditionLimit ? Uniqueness::Unique : Uniqueness::NonUnique;
  svd.setThreshold(1.0 / kConditionLimit);
  const Eigen::VectorXd x = svd.solve(sys.y_tilde);
  out.residual = (sys.t_tilde * x - sys.y_tilde).norm();
  detail::require(out.residual <= 1e-6 * std::max(sys.y_tilde.norm(), 1e-300) || out.residual == 0.0,
                  ErrorKind::NoNashEquilibrium,
                  "first-order system is inconsistent (residual " + std::to_string(out.residual) + ")");

  Eigen::VectorXd sp = s.values();
  for (std::size_t k = 0; k < sys.row_index.size(); ++k) sp(sys.row_index[k]) = x(static_cast<Index>(k));
  out.s_prime = ReportedOpinions(std::move(sp));
  out.z_prime = ExpressedOpinions(b.apply(out.s_prime.values()));
  out.max_gradient = verify_nash(b, out.s_prime, s, set);
  return out;
}

/// Builds and solves the game; an empty set yields the truthful outcome.
inline StrategicOutcome strategic_equilibrium(const ResponseMatrix& b, const TrueOpinions& s, const StrategicSet& set) {
  if (set.empty()) {
    b.check_size(s.size());
    StrategicOutcome out;
    out.s_prime = ReportedOpinions(s.values());
    out.z_prime = ExpressedOpinions(b.apply(s.values()));
    return out;
  }
  return solve_nash(build_system(b, s, set), b, s, set);
}

/// s' = (1/a~) B^{-1} diag(B) s and z' = (1/a~) diag(B) s for shared alpha,
/// S = [n]. This is a formula evaluation only; `max_gradient` reports how far
/// it is from satisfying the first-order conditions (it generally does not).
inline StrategicOutcome closed_form_all_deviate(const ResponseMatrix& b, const TrueOpinions& s) {
  detail::require(b.susceptibility().is_shared(), ErrorKind::SharedAlphaRequired,
                  "closed form requires a shared alpha");
  b.check_size(s.size());
  const Index n = b.size();
  StrategicOutcome out;
  if (n == 0) return out;
  const double at = b.susceptibility().alpha_tilde()(0);
  const Eigen::VectorXd z = (b.matrix().diagonal().array() * s.values().array() / at).matrix();
  out.s_prime = ReportedOpinions(b.apply_inverse(z));
  out.z_prime = ExpressedOpinions(z);
  out.residual = (b.apply(out.s_prime.values()) - z).cwiseAbs().maxCoeff();
  out.uniqueness = Uniqueness::Unique;
  out.max_gradient = check_first_order_conditions(b, out.s_prime, s, StrategicSet::all(n)).max_gradient;
  return out;
}

/// Agent i's best reply given every other entry of `s_prime`: the root of its
/// first-order condition, which is linear in s'_i.
inline double best_response(const ResponseMatrix& b, const TrueOpinions& s, Index i, const Eigen::VectorXd& s_prime) {
  b.check_size(s.size());
  b.check_size(s_prime.size());
  const Eigen::RowVectorXd row = detail::nash_row(b, i);
  const double coeff = row(i);
  detail::require(std::abs(coeff) >= 1e-12, ErrorKind::DegenerateCoefficient,
                  "agent " + std::to_string(i) + " has a vanishing first-order coefficient");
  const double rhs = b.susceptibility()[i] * b.matrix()(i, i) * s[i];
  return (rhs - (row.dot(s_prime) - coeff * s_prime(i))) / coeff;
}

struct IteratedBestResponse {
  ReportedOpinions s_prime;
  int rounds = 0;
  bool converged = false;
};

/// Round-robin best responses over S in ascending order, starting from s'
/// = s, until a full round moves no entry by more than `tol`.
inline IteratedBestResponse iterated_best_response(const ResponseMatrix& b, const TrueOpinions& s,
                                                   const StrategicSet& set, double tol = 1e-12, int max_rounds = 10000) {
  IteratedBestResponse out;
  Eigen::VectorXd sp = s.values();
  if (set.empty()) {
    out.s_prime = ReportedOpinions(sp);
    out.converged = true;
    return out;
  }
  const NashSystem sys = build_system(b, s, set);
  for (Index k = 0; k < sys.t_rows.rows(); ++k) {
    const Index i = sys.row_index[static_cast<std::size_t>(k)];
    detail::require(std::abs(sys.t_rows(k, i)) >= 1e-12, ErrorKind::DegenerateCoefficient,
                    "agent " + std::to_string(i) + " has a vanishing first-order coefficient");
  }
  for (out.rounds = 1; out.rounds <= max_rounds; ++out.rounds) {
    double moved = 0.0;
    for (Index k = 0; k < sys.t_rows.rows(); ++k) {
      const Index i = sys.row_index[static_cast<std::size_t>(k)];
      const double coeff = sys.t_rows(k, i);
      const double next = (sys.y(k) - (sys.t_rows.row(k).dot(sp) - coeff * sp(i))) / coeff;
      moved = std::max(moved, std::abs(next - sp(i)));
      sp(i) = next;
    }
    if (!std::isfinite(moved)) break;
    if (moved <= tol * std::max(1.0, sp.cwiseAbs().maxCoeff())) {
      out.converged = true;
      break;
    }
  }
  out.rounds = std::min(out.rounds, max_rounds);
  out.s_prime = ReportedOpinions(sp.allFinite() ? sp : s.values());
  return out;
}

}  // namespace fjgame
