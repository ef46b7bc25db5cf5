#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

#include "fjgame/error.hpp"

namespace fjgame {

enum class OpinionRole { IntrinsicTrue, IntrinsicReported, Expressed };

/// A finite real vector over the nodes, tagged with what it represents.
///
/// The tag keeps truthful intrinsic opinions, misreports and expressed
/// opinions from being mixed up: costs are only ever charged against
/// `TrueOpinions`.
template <OpinionRole Role>
class OpinionProfile {
 public:
  static constexpr OpinionRole role = Role;

  OpinionProfile() = default;

  explicit OpinionProfile(Eigen::VectorXd values) : values_(std::move(values)) {
    detail::require(values_.allFinite(), ErrorKind::InvalidArgument, "opinion profile contains non-finite entries");
  }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  Eigen::VectorXd values_;
};

using TrueOpinions = OpinionProfile<OpinionRole::IntrinsicTrue>;
using ReportedOpinions = OpinionProfile<OpinionRole::IntrinsicReported>;
using ExpressedOpinions = OpinionProfile<OpinionRole::Expressed>;

/// Intrinsic opinions of either kind (the equilibrium map accepts both).
template <OpinionRole Role>
concept IntrinsicRole = Role != OpinionRole::Expressed;

/// Per-agent susceptibility alpha_i in (0,1) and alpha~_i = alpha_i / (1 - alpha_i).
class SusceptibilityProfile {
 public:
  SusceptibilityProfile() = default;

  explicit SusceptibilityProfile(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
    for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
      const double a = alpha_(i);
      detail::require(std::isfinite(a) && a > 0.0 && a < 1.0, ErrorKind::SingularSusceptibility,
                      "alpha[" + std::to_string(i) + "] = " + std::to_string(a) + " is outside (0,1)");
    }
    alpha_tilde_ = alpha_.array() / (1.0 - alpha_.array());
  }

  static SusceptibilityProfile shared(Eigen::Index n, double alpha) {
    return SusceptibilityProfile(Eigen::VectorXd::Constant(n, alpha));
  }

  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& alpha_tilde() const { return alpha_tilde_; }
  double operator[](Eigen::Index i) const { return alpha_(i); }
  Eigen::Index size() const { return alpha_.size(); }

  /// True when every agent has exactly the same alpha.
  bool is_shared() const {
    return alpha_.size() == 0 || (alpha_.array() == alpha_(0)).all();
  }

  double min() const { return alpha_.minCoeff(); }
  double max() const { return alpha_.maxCoeff(); }

 private:
  Eigen::VectorXd alpha_;
  Eigen::VectorXd alpha_tilde_;
};

}  // namespace fjgame
