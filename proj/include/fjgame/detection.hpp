#pragma once

#include <Eigen/Dense>

#include <span>

#include "fjgame/error.hpp"
#include "fjgame/fj.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/opinions.hpp"
#include "fjgame/stats.hpp"

namespace fjgame {

/// Inverts the equilibrium map with the platform's estimates (L^, A^):
///   s'^ = A^{-1}((I - A)L + A) z' = z' + diag(1/alpha~) L z'.
inline ReportedOpinions reconstruct_intrinsic(const WeightedGraph& g_hat, const SusceptibilityProfile& alpha_hat,
                                              const ExpressedOpinions& z_prime) {
  const Index n = g_hat.size();
  detail::require(alpha_hat.size() == n && z_prime.size() == n, ErrorKind::DimensionMismatch,
                  "graph, susceptibility and observed opinions must have equal length");
  const Eigen::VectorXd lz = laplacian_apply(g_hat, z_prime.values());
  return ReportedOpinions(z_prime.values() + (lz.array() / alpha_hat.alpha_tilde().array()).matrix());
}

enum class Verdict { Manipulation, NoManipulation };

inline const char* to_string(Verdict v) { return v == Verdict::Manipulation ? "Manipulation" : "NoManipulation"; }

struct DetectionOutcome {
  Verdict verdict = Verdict::NoManipulation;
  double t_statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
  ReportedOpinions reconstructed;
  double significance = 0.05;
  stats::SampleStatus status = stats::SampleStatus::Ok;
};

/// Reconstruct the reported intrinsic opinions and t-test them against mu0.
inline DetectionOutcome detect_manipulation(const WeightedGraph& g_hat, const SusceptibilityProfile& alpha_hat,
                                            const ExpressedOpinions& z_prime, double mu0, double significance = 0.05) {
  detail::require(significance > 0.0 && significance <= 1.0, ErrorKind::InvalidArgument,
                  "significance must lie in (0,1]");
  DetectionOutcome out;
  out.reconstructed = reconstruct_intrinsic(g_hat, alpha_hat, z_prime);
  const Eigen::VectorXd& v = out.reconstructed.values();
  const stats::TTestResult t = stats::t_test_one_sample(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), mu0);
  out.t_statistic = t.t;
  out.p_value = t.p_value;
  out.dof = t.dof;
  out.status = t.status;
  out.significance = significance;
  out.verdict = out.p_value < significance ? Verdict::Manipulation : Verdict::NoManipulation;
  return out;
}

}  // namespace fjgame
