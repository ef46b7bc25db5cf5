#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "fjgame/detection.hpp"
#include "fjgame/error.hpp"
#include "fjgame/fj.hpp"
#include "fjgame/graph.hpp"
#include "fjgame/io.hpp"
#include "fjgame/opinions.hpp"
#include "fjgame/random.hpp"
#include "fjgame/recovery.hpp"
#include "fjgame/strategic.hpp"

namespace fjgame {

struct GaussianOpinions {
  double mu = 0.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

/// +1 with probability p, -1 otherwise.
struct RademacherOpinions {
  double p = 0.5;
  std::uint64_t seed = 0;
};

/// s = X v for the scenario's embedding.
struct EmbeddingOpinions {
  Eigen::VectorXd v;
};

using OpinionSource = std::variant<Eigen::VectorXd, GaussianOpinions, RademacherOpinions, EmbeddingOpinions>;

struct ExplicitSet {
  std::vector<Index> members;
};

struct TopCentralityFraction {
  double p = 1.0;
};

struct RandomFraction {
  double p = 1.0;
  std::uint64_t seed = 0;
};

using SetSource = std::variant<ExplicitSet, TopCentralityFraction, RandomFraction>;

struct Scenario {
  WeightedGraph graph;
  OpinionSource opinions = Eigen::VectorXd();
  std::optional<SusceptibilityProfile> alpha;
  SetSource set = TopCentralityFraction{1.0};
  std::optional<Eigen::MatrixXd> embedding;
  std::uint64_t seed = 0;  // per-trial seed = seed + trial index
};

/// ceil(p n) computed without the floating overshoot of ceil(0.07 * 100).
inline Index fraction_count(double p, Index n) {
  return static_cast<Index>(std::ceil(p * static_cast<double>(n) - 1e-9));
}

inline void require_fraction(double p) {
  detail::require(p > 0.0 && p <= 1.0, ErrorKind::InvalidArgument, "fraction must lie in (0,1]");
}

/// The ceil(p n) nodes of highest eigenvector centrality, ties to the lower index.
inline StrategicSet select_top_centrality(const WeightedGraph& g, double p) {
  require_fraction(p);
  const Index n = g.size();
  const Index k = fraction_count(p, n);
  if (k >= n) return StrategicSet::all(n);
  const Eigen::VectorXd c = eigenvector_centrality(g);
  return StrategicSet(top_k_indices(c, k), n);
}

/// k distinct nodes uniformly at random (partial Fisher-Yates).
inline StrategicSet sample_random_set(Index n, Index k, Rng& rng) {
  detail::require(k >= 0 && k <= n, ErrorKind::InvalidArgument, "set size must lie in [0, n]");
  std::vector<Index> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]);
  }
  nodes.resize(static_cast<std::size_t>(k));
  return StrategicSet(std::move(nodes), n);
}

/// Draws intrinsic opinions; `seed` overrides the generator's own seed.
inline TrueOpinions sample_opinions(const OpinionSource& source, Index n, const std::optional<Eigen::MatrixXd>& x,
                                    std::optional<std::uint64_t> seed = std::nullopt) {
  return std::visit(
      [&](const auto& src) -> TrueOpinions {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, Eigen::VectorXd>) {
          detail::require(src.size() == n, ErrorKind::DimensionMismatch,
                          "opinion vector has " + std::to_string(src.size()) + " entries for " + std::to_string(n) +
                              " nodes");
          return TrueOpinions(src);
        } else if constexpr (std::is_same_v<T, GaussianOpinions>) {
          detail::require(src.sigma >= 0.0, ErrorKind::InvalidArgument, "sigma must be nonnegative");
          Rng rng(seed.value_or(src.seed));
          Eigen::VectorXd s(n);
          for (Index i = 0; i < n; ++i) s(i) = src.mu + src.sigma * rng.normal();
          return TrueOpinions(std::move(s));
        } else if constexpr (std::is_same_v<T, RademacherOpinions>) {
          detail::require(src.p >= 0.0 && src.p <= 1.0, ErrorKind::InvalidArgument, "p must lie in [0,1]");
          Rng rng(seed.value_or(src.seed));
          Eigen::VectorXd s(n);
          for (Index i = 0; i < n; ++i) s(i) = rng.bernoulli(src.p) ? 1.0 : -1.0;
          return TrueOpinions(std::move(s));
        } else {
          detail::require(x.has_value(), ErrorKind::InvalidArgument, "embedding opinions need an embedding");
          detail::require(x->rows() == n && x->cols() == src.v.size(), ErrorKind::DimensionMismatch,
                          "embedding and weight vector shapes do not match");
          return TrueOpinions(*x * src.v);
        }
      },
      source);
}

/// Whether the source draws fresh values per trial.
inline bool is_random_source(const OpinionSource& source) {
  return std::holds_alternative<GaussianOpinions>(source) || std::holds_alternative<RademacherOpinions>(source);
}

inline StrategicSet resolve_set(const SetSource& source, const WeightedGraph& g) {
  const Index n = g.size();
  return std::visit(
      [&](const auto& src) -> StrategicSet {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, ExplicitSet>) {
          return StrategicSet(src.members, n);
        } else if constexpr (std::is_same_v<T, TopCentralityFraction>) {
          return select_top_centrality(g, src.p);
        } else {
          require_fraction(src.p);
          Rng rng(src.seed);
          return sample_random_set(n, fraction_count(src.p, n), rng);
        }
      },
      source);
}

enum class RowStatus { Ok, Degenerate };

inline const char* to_string(RowStatus s) { return s == RowStatus::Ok ? "OK" : "DEGENERATE"; }

struct SweepRow {
  double frac = 1.0;   // strategic fraction (sweep_strategic_fraction only)
  double alpha = 0.0;  // shared alpha, or mean alpha for a heterogeneous profile
  Index set_size = 0;
  double pol_ratio = 0.0;
  double dis_ratio = 0.0;
  double pom = 0.0;
  double max_gradient = 0.0;
  Uniqueness uniqueness = Uniqueness::None;
  RowStatus status = RowStatus::Ok;
};

inline constexpr double kSweepGradientLimit = 1e-6;

/// Truthful and strategic outcome for one (B, s, S); ratios are NaN and the
/// row DEGENERATE when C(z), P(z) or D(z) is below 1e-14.
inline SweepRow evaluate_instance(const ResponseMatrix& b, const TrueOpinions& s, const StrategicSet& set) {
  const ExpressedOpinions z = fj_equilibrium(b, s);
  const StrategicOutcome out = strategic_equilibrium(b, s, set);
  detail::require(out.max_gradient <= kSweepGradientLimit, ErrorKind::GradientMismatch,
                  "equilibrium gradient " + std::to_string(out.max_gradient) + " exceeds 1e-6");
  const auto& g = b.graph();
  const auto& alpha = b.susceptibility();
  SweepRow row;
  row.alpha = alpha.size() ? alpha.alpha().mean() : 0.0;
  row.set_size = set.size();
  row.max_gradient = out.max_gradient;
  row.uniqueness = out.uniqueness;
  const double p0 = polarization(z.values());
  const double d0 = disagreement(g, z.values());
  const double c0 = total_cost(z, s, g, alpha);
  if (p0 < kDegenerateCost || d0 < kDegenerateCost || c0 < kDegenerateCost) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.pol_ratio = row.dis_ratio = row.pom = nan;
    row.status = RowStatus::Degenerate;
    return row;
  }
  row.pol_ratio = polarization(out.z_prime.values()) / p0;
  row.dis_ratio = disagreement(g, out.z_prime.values()) / d0;
  row.pom = total_cost(out.z_prime, s, g, alpha) / c0;
  return row;
}

/// Shared-alpha sweep on the scenario's graph, opinions and strategic set.
inline std::vector<SweepRow> sweep_alpha(const Scenario& sc, const std::vector<double>& alphas) {
  const Index n = sc.graph.size();
  const TrueOpinions s = sample_opinions(sc.opinions, n, sc.embedding);
  const StrategicSet set = resolve_set(sc.set, sc.graph);
  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (double a : alphas) {
    const ResponseMatrix b(sc.graph, SusceptibilityProfile::shared(n, a));
    SweepRow row = evaluate_instance(b, s, set);
    row.alpha = a;
    row.frac = n ? static_cast<double>(set.size()) / static_cast<double>(n) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

/// For each p, S = top ceil(p n) nodes by centrality, alpha from the scenario.
inline std::vector<SweepRow> sweep_strategic_fraction(const Scenario& sc, const std::vector<double>& fractions) {
  detail::require(sc.alpha.has_value(), ErrorKind::InvalidArgument, "fraction sweep needs a susceptibility profile");
  const Index n = sc.graph.size();
  const TrueOpinions s = sample_opinions(sc.opinions, n, sc.embedding);
  const ResponseMatrix b(sc.graph, *sc.alpha);
  std::vector<SweepRow> rows;
  rows.reserve(fractions.size());
  for (double p : fractions) {
    SweepRow row = evaluate_instance(b, s, select_top_centrality(sc.graph, p));
    row.frac = p;
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_frac) {
  out << (with_frac ? "frac," : "") << "alpha,pol_ratio,dis_ratio,pom,max_gradient,status\n";
  for (const SweepRow& r : rows) {
    if (with_frac) out << io::format_double(r.frac) << ',';
    out << io::format_double(r.alpha) << ',' << io::format_double(r.pol_ratio) << ','
        << io::format_double(r.dis_ratio) << ',' << io::format_double(r.pom) << ','
        << io::format_double(r.max_gradient) << ',' << to_string(r.status) << '\n';
  }
}

struct DetectionTrial {
  int trial = 0;
  Index set_size = 0;
  double p_value = 1.0;
  Verdict verdict = Verdict::NoManipulation;
};

struct DetectionExperiment {
  std::vector<DetectionTrial> trials;
  std::optional<double> type_i_rate;   // among trials with |S| = 0
  std::optional<double> type_ii_rate;  // among trials with |S| > 0
};

struct DetectionConfig {
  int n_trials = 500;
  double fraction = 0.0;   // |S| = ceil(fraction n); 0 gives the null experiment
  double shift = 0.0;      // added to the deviators' reports after the game is solved
  double significance = 0.05;
};

/// Per trial t (seed = scenario seed + t): draw s from the Gaussian source,
/// pick a random S, let S play the misreporting game, shift their reports by
/// `shift`, and test the reconstructed reports against the source mean with
/// the exact (L, A).
inline DetectionExperiment detection_experiment(const Scenario& sc, const DetectionConfig& cfg) {
  const auto* gauss = std::get_if<GaussianOpinions>(&sc.opinions);
  detail::require(gauss != nullptr, ErrorKind::InvalidArgument, "detection experiment needs Gaussian opinions");
  detail::require(sc.alpha.has_value(), ErrorKind::InvalidArgument, "detection experiment needs a susceptibility profile");
  detail::require(cfg.n_trials >= 1, ErrorKind::InvalidArgument, "need at least one trial");
  detail::require(cfg.fraction >= 0.0 && cfg.fraction <= 1.0, ErrorKind::InvalidArgument,
                  "fraction must lie in [0,1]");
  const Index n = sc.graph.size();
  const Index k = cfg.fraction > 0.0 ? fraction_count(cfg.fraction, n) : 0;
  const ResponseMatrix b(sc.graph, *sc.alpha);

  DetectionExperiment exp;
  int null_trials = 0, false_alarms = 0, alt_trials = 0, misses = 0;
  for (int t = 0; t < cfg.n_trials; ++t) {
    const std::uint64_t seed = sc.seed + static_cast<std::uint64_t>(t);
    const TrueOpinions s = sample_opinions(sc.opinions, n, sc.embedding, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const StrategicSet set = sample_random_set(n, k, rng);
    Eigen::VectorXd reported = strategic_equilibrium(b, s, set).s_prime.values();
    for (Index i : set.members()) reported(i) += cfg.shift;
    const ExpressedOpinions z_prime(b.apply(reported));
    const DetectionOutcome d = detect_manipulation(sc.graph, *sc.alpha, z_prime, gauss->mu, cfg.significance);
    exp.trials.push_back({t, k, d.p_value, d.verdict});
    if (k == 0) {
      ++null_trials;
      false_alarms += d.verdict == Verdict::Manipulation;
    } else {
      ++alt_trials;
      misses += d.verdict == Verdict::NoManipulation;
    }
  }
  if (null_trials) exp.type_i_rate = static_cast<double>(false_alarms) / null_trials;
  if (alt_trials) exp.type_ii_rate = static_cast<double>(misses) / alt_trials;
  return exp;
}

inline void write_detection_csv(std::ostream& out, const DetectionExperiment& exp) {
  out << "trial,set_size,p_value,verdict\n";
  for (const DetectionTrial& t : exp.trials) {
    out << t.trial << ',' << t.set_size << ',' << io::format_double(t.p_value) << ',' << to_string(t.verdict) << '\n';
  }
  out << "# type_i_rate=" << (exp.type_i_rate ? io::format_double(*exp.type_i_rate) : "NA")
      << " type_ii_rate=" << (exp.type_ii_rate ? io::format_double(*exp.type_ii_rate) : "NA") << '\n';
}

struct RecoveryScore {
  double error = 0.0;  // mean |(s_hat_i - s_i) / s_i| over |s_i| >= 1e-12
  Index excluded = 0;  // entries skipped for |s_i| < 1e-12
};

inline RecoveryScore relative_recovery_error(const Eigen::VectorXd& s_hat, const Eigen::VectorXd& s) {
  detail::require(s_hat.size() == s.size(), ErrorKind::DimensionMismatch, "recovery error needs equal lengths");
  RecoveryScore r;
  double sum = 0.0;
  Index used = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (std::abs(s(i)) < 1e-12) {
      ++r.excluded;
      continue;
    }
    sum += std::abs((s_hat(i) - s(i)) / s(i));
    ++used;
  }
  r.error = used ? sum / static_cast<double>(used) : 0.0;
  return r;
}

/// Mean of true-positive and true-negative rates; just the TNR when S is
/// empty (and just the TPR when S is everything).
inline double balanced_accuracy(const StrategicSet& truth, const StrategicSet& found) {
  const Index n = truth.universe();
  Index tp = 0, tn = 0;
  for (Index i = 0; i < n; ++i) {
    const bool in_truth = truth.contains(i);
    const bool in_found = found.contains(i);
    tp += in_truth && in_found;
    tn += !in_truth && !in_found;
  }
  const Index pos = truth.size();
  const Index neg = n - pos;
  if (pos == 0) return neg ? static_cast<double>(tn) / static_cast<double>(neg) : 1.0;
  if (neg == 0) return static_cast<double>(tp) / static_cast<double>(pos);
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(pos) + static_cast<double>(tn) / static_cast<double>(neg));
}

struct RecoveryTrial {
  double frac = 0.0;
  int trial = 0;
  Index set_size = 0;
  double recovery_error = 0.0;
  double balanced_accuracy = 0.0;
  Index excluded = 0;
  int iterations = 0;
  bool exact = false;  // S_hat == S
};

struct RecoveryConfig {
  std::vector<double> fractions{0.05, 0.1, 0.15, 0.2};
  int n_trials = 10;
  TorrentVariant variant = TorrentVariant::FullyCorrective;
};

/// Per (fraction f, trial t), seed = scenario seed + f_index * n_trials + t:
/// random S of size ceil(f n), the misreporting game, then recovery with
/// k = |S| (k = 1 for the empty control).
inline std::vector<RecoveryTrial> recovery_experiment(const Scenario& sc, const RecoveryConfig& cfg) {
  detail::require(sc.embedding.has_value(), ErrorKind::InvalidArgument, "recovery experiment needs an embedding");
  detail::require(sc.alpha.has_value(), ErrorKind::InvalidArgument, "recovery experiment needs a susceptibility profile");
  detail::require(cfg.n_trials >= 1, ErrorKind::InvalidArgument, "need at least one trial");
  const Index n = sc.graph.size();
  const ResponseMatrix b(sc.graph, *sc.alpha);
  std::vector<RecoveryTrial> rows;
  for (std::size_t f = 0; f < cfg.fractions.size(); ++f) {
    const double frac = cfg.fractions[f];
    detail::require(frac >= 0.0 && frac < 1.0, ErrorKind::InvalidArgument, "recovery fractions must lie in [0,1)");
    const Index size = frac > 0.0 ? fraction_count(frac, n) : 0;
    for (int t = 0; t < cfg.n_trials; ++t) {
      const std::uint64_t seed = sc.seed + f * static_cast<std::uint64_t>(cfg.n_trials) + static_cast<std::uint64_t>(t);
      const TrueOpinions s = sample_opinions(sc.opinions, n, sc.embedding,
                                             is_random_source(sc.opinions) ? std::optional(seed) : std::nullopt);
      Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
      const StrategicSet set = sample_random_set(n, size, rng);
      const StrategicOutcome game = strategic_equilibrium(b, s, set);
      const RecoveryResult rec = recover_deviators(*sc.embedding, sc.graph, *sc.alpha, game.z_prime,
                                                   std::max<Index>(1, size), cfg.variant);
      const RecoveryScore score = relative_recovery_error(rec.s_hat.values(), s.values());
      rows.push_back({frac, t, size, score.error, balanced_accuracy(set, rec.s_set_hat), score.excluded,
                      rec.iterations, rec.s_set_hat == set});
    }
  }
  return rows;
}

inline void write_recovery_csv(std::ostream& out, const std::vector<RecoveryTrial>& rows) {
  out << "frac,trial,recovery_error,balanced_accuracy,set_size,excluded,iterations\n";
  for (const RecoveryTrial& r : rows) {
    out << io::format_double(r.frac) << ',' << r.trial << ',' << io::format_double(r.recovery_error) << ','
        << io::format_double(r.balanced_accuracy) << ',' << r.set_size << ',' << r.excluded << ',' << r.iterations
        << '\n';
  }
}

}  // namespace fjgame
