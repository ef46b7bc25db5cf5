// Command-line front end: equilibria, the misreporting game, detection,
// recovery and the batch experiments. Exit codes: 0 ok, 2 bad input, 3
// numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fjgame/fjgame.hpp"

namespace {

using fjgame::Index;
namespace io = fjgame::io;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string graph;
  std::string alpha;
  std::string opinions;
  std::string zprime;
  std::string set;
  double top_frac = 0.0;
  double random_frac = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  Index nodes = 0;

  // generated opinions
  std::vector<double> gaussian;  // mu sigma
  double rademacher = -1.0;
  std::string embeddings;
  std::vector<double> weights;

  // operation-specific
  double mu0 = 0.0;
  double significance = 0.05;
  bool csv = false;
  Index k = 1;
  std::string variant = "fc";
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> fracs;
  int trials = 100;
  double frac = 0.0;
  double shift = 0.0;
  std::vector<Index> sizes;
  double p_in = 0.5;
  double p_out = 0.05;
  std::string embeddings_out;
  std::string opinions_out;
  double gamma = 0.0;
};

/// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw fjgame::Error(fjgame::ErrorKind::ParseError, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::optional<Eigen::VectorXd> maybe_vector(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::read_vector(path);
}

fjgame::WeightedGraph load_graph(const Options& o, Index extra_nodes = 0) {
  if (o.graph.empty()) throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "--graph is required");
  return io::read_edge_list(o.graph, std::max(o.nodes, extra_nodes));
}

fjgame::SusceptibilityProfile load_alpha(const Options& o, Index n) {
  if (o.alpha.empty()) throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "--alpha is required");
  return io::read_susceptibility(o.alpha, n);
}

std::optional<Eigen::MatrixXd> load_embeddings(const Options& o) {
  if (o.embeddings.empty()) return std::nullopt;
  return io::read_matrix(o.embeddings);
}

/// --opinions file, --gaussian mu sigma, --rademacher p, or --weights v with --embeddings.
fjgame::OpinionSource opinion_source(const Options& o) {
  int chosen = !o.opinions.empty() + !o.gaussian.empty() + (o.rademacher >= 0.0) + !o.weights.empty();
  if (chosen != 1) {
    throw fjgame::Error(fjgame::ErrorKind::InvalidArgument,
                        "give exactly one of --opinions, --gaussian, --rademacher, --weights");
  }
  if (!o.opinions.empty()) return io::read_vector(o.opinions);
  if (!o.gaussian.empty()) {
    if (o.gaussian.size() != 2) throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "--gaussian takes MU SIGMA");
    return fjgame::GaussianOpinions{o.gaussian[0], o.gaussian[1], o.seed};
  }
  if (o.rademacher >= 0.0) return fjgame::RademacherOpinions{o.rademacher, o.seed};
  return fjgame::EmbeddingOpinions{Eigen::Map<const Eigen::VectorXd>(o.weights.data(), static_cast<Index>(o.weights.size()))};
}

fjgame::SetSource set_source(const Options& o) {
  const int chosen = !o.set.empty() + (o.top_frac > 0.0) + (o.random_frac > 0.0);
  if (chosen != 1) {
    throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "give exactly one of --set, --top-frac, --random-frac");
  }
  if (!o.set.empty()) return fjgame::ExplicitSet{};  // resolved by the caller, needs n
  if (o.top_frac > 0.0) return fjgame::TopCentralityFraction{o.top_frac};
  return fjgame::RandomFraction{o.random_frac, o.seed};
}

fjgame::StrategicSet resolve(const Options& o, const fjgame::WeightedGraph& g) {
  const fjgame::SetSource src = set_source(o);
  if (!o.set.empty()) return io::read_strategic_set(o.set, g.size());
  return fjgame::resolve_set(src, g);
}

/// Scenario for the batch commands; node count grows to fit any loaded vectors.
fjgame::Scenario build_scenario(const Options& o, bool needs_alpha, bool needs_set) {
  fjgame::Scenario sc;
  sc.opinions = opinion_source(o);
  sc.embedding = load_embeddings(o);
  Index min_nodes = 0;
  if (const auto* v = std::get_if<Eigen::VectorXd>(&sc.opinions)) min_nodes = v->size();
  if (sc.embedding) min_nodes = std::max(min_nodes, sc.embedding->rows());
  sc.graph = load_graph(o, min_nodes);
  if (needs_alpha) sc.alpha = load_alpha(o, sc.graph.size());
  if (needs_set) {
    if (!o.set.empty()) {
      sc.set = fjgame::ExplicitSet{io::read_strategic_set(o.set, sc.graph.size()).members()};
    } else {
      sc.set = set_source(o);
    }
  }
  sc.seed = o.seed;
  return sc;
}

fjgame::TorrentVariant parse_variant(const std::string& v) {
  if (v == "fc") return fjgame::TorrentVariant::FullyCorrective;
  if (v == "gd") return fjgame::TorrentVariant::GradientStep;
  throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "--variant must be fc or gd");
}

void run_equilibrium(const Options& o) {
  const Eigen::VectorXd s = io::read_vector(o.opinions);
  const auto g = load_graph(o, s.size());
  const fjgame::ResponseMatrix b(g, load_alpha(o, g.size()));
  Sink sink(o.out);
  io::write_vector(sink.stream(), fjgame::fj_equilibrium(b, fjgame::TrueOpinions(s)).values());
}

void run_strategic(const Options& o) {
  const Eigen::VectorXd sv = io::read_vector(o.opinions);
  const auto g = load_graph(o, sv.size());
  const fjgame::ResponseMatrix b(g, load_alpha(o, g.size()));
  const fjgame::TrueOpinions s(sv);
  const fjgame::StrategicSet set = resolve(o, g);
  const fjgame::ExpressedOpinions z = fjgame::fj_equilibrium(b, s);
  const fjgame::StrategicOutcome out = fjgame::strategic_equilibrium(b, s, set);
  Sink sink(o.out);
  std::ostream& os = sink.stream();
  os << "node,s,s_prime,z,z_prime,in_S\n";
  for (Index i = 0; i < g.size(); ++i) {
    os << i << ',' << io::format_double(s[i]) << ',' << io::format_double(out.s_prime[i]) << ','
       << io::format_double(z[i]) << ',' << io::format_double(out.z_prime[i]) << ',' << set.contains(i) << '\n';
  }
  os << "# uniqueness=" << fjgame::to_string(out.uniqueness) << " max_gradient=" << io::format_double(out.max_gradient)
     << " condition=" << io::format_double(out.condition) << " residual=" << io::format_double(out.residual) << '\n';
}

void run_metrics(const Options& o) {
  const Eigen::VectorXd sv = io::read_vector(o.opinions);
  const auto zp = maybe_vector(o.zprime);
  const auto g = load_graph(o, sv.size());
  const auto alpha = load_alpha(o, g.size());
  const fjgame::ResponseMatrix b(g, alpha);
  const fjgame::TrueOpinions s(sv);
  const fjgame::ExpressedOpinions z = fjgame::fj_equilibrium(b, s);
  const fjgame::MetricsReport m = fjgame::metrics(z, s, g, alpha);
  Sink sink(o.out);
  std::ostream& os = sink.stream();
  os << "profile,polarization,disagreement,total_cost,mean_opinion\n";
  os << "truthful," << io::format_double(m.polarization) << ',' << io::format_double(m.disagreement) << ','
     << io::format_double(m.total_cost) << ',' << io::format_double(m.mean_opinion) << '\n';
  if (zp) {
    const fjgame::ExpressedOpinions z_prime(*zp);
    const fjgame::MetricsReport mp = fjgame::metrics(z_prime, s, g, alpha);
    os << "observed," << io::format_double(mp.polarization) << ',' << io::format_double(mp.disagreement) << ','
       << io::format_double(mp.total_cost) << ',' << io::format_double(mp.mean_opinion) << '\n';
    os << "# pom=" << io::format_double(fjgame::pom(z_prime, z, s, g, alpha)) << '\n';
  }
}

void run_detect(const Options& o) {
  const Eigen::VectorXd zp = io::read_vector(o.zprime);
  const auto g = load_graph(o, zp.size());
  const auto alpha = load_alpha(o, g.size());
  const fjgame::DetectionOutcome d =
      fjgame::detect_manipulation(g, alpha, fjgame::ExpressedOpinions(zp), o.mu0, o.significance);
  Sink sink(o.out);
  std::ostream& os = sink.stream();
  if (o.csv) {
    os << "verdict,t,p_value,dof,significance\n"
       << fjgame::to_string(d.verdict) << ',' << io::format_double(d.t_statistic) << ','
       << io::format_double(d.p_value) << ',' << d.dof << ',' << io::format_double(d.significance) << '\n';
  } else {
    os << "verdict: " << fjgame::to_string(d.verdict) << "\nt: " << io::format_double(d.t_statistic)
       << "\np: " << io::format_double(d.p_value) << "\ndof: " << d.dof << '\n';
  }
}

void run_recover(const Options& o) {
  const Eigen::VectorXd zp = io::read_vector(o.zprime);
  const auto x = load_embeddings(o);
  if (!x) throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "--embeddings is required");
  const auto g = load_graph(o, zp.size());
  const auto alpha = load_alpha(o, g.size());
  const fjgame::RecoveryResult r =
      fjgame::recover_deviators(*x, g, alpha, fjgame::ExpressedOpinions(zp), o.k, parse_variant(o.variant));
  const auto truth = maybe_vector(o.opinions);
  Sink sink(o.out);
  std::ostream& os = sink.stream();
  os << "node,diff,in_S_hat\n";
  for (Index i = 0; i < g.size(); ++i) {
    os << i << ',' << io::format_double(r.diffs(i)) << ',' << r.s_set_hat.contains(i) << '\n';
  }
  os << "# iterations=" << r.iterations << " ambiguous=" << r.ambiguous_membership;
  if (truth) {
    const fjgame::RecoveryScore score = fjgame::relative_recovery_error(r.s_hat.values(), *truth);
    os << " recovery_error=" << io::format_double(score.error) << " excluded=" << score.excluded;
  }
  os << '\n';
  if (r.ambiguous_membership) std::cerr << "warning: k-th and (k+1)-th differences are within 1e-9\n";
}

void run_sweep_alpha(const Options& o) {
  const fjgame::Scenario sc = build_scenario(o, false, true);
  Sink sink(o.out);
  fjgame::write_sweep_csv(sink.stream(), fjgame::sweep_alpha(sc, o.alphas), false);
}

void run_sweep_frac(const Options& o) {
  const fjgame::Scenario sc = build_scenario(o, true, false);
  const std::vector<double> fracs = o.fracs.empty() ? std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07,
                                                                          0.08, 0.09, 0.1}
                                                    : o.fracs;
  Sink sink(o.out);
  fjgame::write_sweep_csv(sink.stream(), fjgame::sweep_strategic_fraction(sc, fracs), true);
}

void run_detect_exp(const Options& o) {
  const fjgame::Scenario sc = build_scenario(o, true, false);
  fjgame::DetectionConfig cfg;
  cfg.n_trials = o.trials;
  cfg.fraction = o.frac;
  cfg.shift = o.shift;
  cfg.significance = o.significance;
  Sink sink(o.out);
  fjgame::write_detection_csv(sink.stream(), fjgame::detection_experiment(sc, cfg));
}

void run_recover_exp(const Options& o) {
  const fjgame::Scenario sc = build_scenario(o, true, false);
  fjgame::RecoveryConfig cfg;
  if (!o.fracs.empty()) cfg.fractions = o.fracs;
  cfg.n_trials = o.trials;
  cfg.variant = parse_variant(o.variant);
  Sink sink(o.out);
  fjgame::write_recovery_csv(sink.stream(), fjgame::recovery_experiment(sc, cfg));
}

void run_gen_blockmodel(const Options& o) {
  const auto [g, emb] = fjgame::generate_blockmodel(o.sizes, o.p_in, o.p_out, o.seed);
  {
    Sink sink(o.out);
    io::write_edge_list(sink.stream(), g);
  }
  if (!o.embeddings_out.empty()) {
    Sink sink(o.embeddings_out);
    io::write_matrix(sink.stream(), emb.X);
  }
  if (!o.opinions_out.empty()) {
    if (static_cast<Index>(o.weights.size()) != emb.X.cols()) {
      throw fjgame::Error(fjgame::ErrorKind::DimensionMismatch, "--weights needs one value per community");
    }
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(o.weights.data(), emb.X.cols());
    Sink sink(o.opinions_out);
    io::write_vector(sink.stream(), emb.X * v);
  }
}

void run_ssc_cert(const Options& o) {
  fjgame::SscSssCertificate c;
  std::optional<double> limit;
  if (!o.sizes.empty()) {
    c = fjgame::blockmodel_constants(o.sizes, o.gamma);
    if (o.sizes.size() >= 2) limit = fjgame::blockmodel_recovery_limit(o.sizes);
  } else {
    const auto x = load_embeddings(o);
    if (!x) throw fjgame::Error(fjgame::ErrorKind::InvalidArgument, "give --sizes or --embeddings");
    c = fjgame::ssc_sss_bruteforce(*x, o.gamma);
  }
  Sink sink(o.out);
  std::ostream& os = sink.stream();
  os << "method,gamma,small_size,large_size,Xi,xi,condition_value,certified\n"
     << (c.method == fjgame::CertificateMethod::BruteForce ? "brute_force" : "blockmodel") << ','
     << io::format_double(c.gamma) << ',' << c.small_size << ',' << c.large_size << ',' << io::format_double(c.Xi)
     << ',' << io::format_double(c.xi) << ',' << io::format_double(c.condition_value) << ',' << c.certified << '\n';
  if (limit) os << "# recovery_limit=" << io::format_double(*limit) << '\n';
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--graph", o.graph, "edge list file (u v [w])");
  cmd->add_option("--alpha", o.alpha, "susceptibility: scalar or file");
  cmd->add_option("--opinions", o.opinions, "intrinsic opinions file");
  cmd->add_option("--set", o.set, "strategic set file");
  cmd->add_option("--top-frac", o.top_frac, "strategic set: top fraction by eigenvector centrality");
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_option("--out", o.out, "output file (default stdout)");
  cmd->add_option("--nodes", o.nodes, "minimum node count for the edge list");
}

void add_generators(CLI::App* cmd, Options& o) {
  cmd->add_option("--gaussian", o.gaussian, "Gaussian opinions: MU SIGMA")->expected(2);
  cmd->add_option("--rademacher", o.rademacher, "+-1 opinions, P(+1) = p");
  cmd->add_option("--embeddings", o.embeddings, "node embedding CSV");
  cmd->add_option("--weights", o.weights, "opinions s = X v from the embedding")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strategic opinion formation: equilibria, misreporting, detection and recovery"};
  app.require_subcommand(1);
  Options o;

  auto* eq = app.add_subcommand("equilibrium", "truthful equilibrium z = B s");
  add_common(eq, o);

  auto* st = app.add_subcommand("strategic", "misreporting equilibrium for a strategic set");
  add_common(st, o);
  st->add_option("--random-frac", o.random_frac, "strategic set: uniform random fraction");

  auto* me = app.add_subcommand("metrics", "polarization, disagreement, cost (and PoM with --zprime)");
  add_common(me, o);
  me->add_option("--zprime", o.zprime, "observed expressed opinions");

  auto* de = app.add_subcommand("detect", "t-test on reconstructed intrinsic opinions");
  add_common(de, o);
  de->add_option("--zprime", o.zprime, "observed expressed opinions")->required();
  de->add_option("--mu0", o.mu0, "null mean");
  de->add_option("--significance", o.significance, "test level");
  de->add_flag("--csv", o.csv, "machine-readable output");

  auto* re = app.add_subcommand("recover", "identify the strategic set by robust regression");
  add_common(re, o);
  re->add_option("--zprime", o.zprime, "observed expressed opinions")->required();
  re->add_option("--embeddings", o.embeddings, "node embedding CSV")->required();
  re->add_option("--k", o.k, "strategic set size")->required();
  re->add_option("--variant", o.variant, "fc (least squares) or gd (gradient step)");

  auto* sa = app.add_subcommand("sweep-alpha", "ratios over a shared-alpha grid");
  add_common(sa, o);
  add_generators(sa, o);
  sa->add_option("--random-frac", o.random_frac, "strategic set: uniform random fraction");
  sa->add_option("--alphas", o.alphas, "alpha grid")->delimiter(',');

  auto* sf = app.add_subcommand("sweep-frac", "ratios over strategic fractions (top centrality)");
  add_common(sf, o);
  add_generators(sf, o);
  sf->add_option("--fracs", o.fracs, "fraction grid")->delimiter(',');

  auto* dx = app.add_subcommand("detect-exp", "Type I / II rates over seeded trials");
  add_common(dx, o);
  add_generators(dx, o);
  dx->add_option("--trials", o.trials, "number of trials");
  dx->add_option("--frac", o.frac, "strategic fraction (0 for the null experiment)");
  dx->add_option("--shift", o.shift, "shift added to deviators' reports");
  dx->add_option("--significance", o.significance, "test level");

  auto* rx = app.add_subcommand("recover-exp", "recovery error and balanced accuracy over seeded trials");
  add_common(rx, o);
  add_generators(rx, o);
  rx->add_option("--fracs", o.fracs, "fraction grid")->delimiter(',');
  rx->add_option("--trials", o.trials, "trials per fraction");
  rx->add_option("--variant", o.variant, "fc or gd");

  auto* gb = app.add_subcommand("gen-blockmodel", "stochastic blockmodel edge list and one-hot features");
  gb->add_option("--sizes", o.sizes, "community sizes")->delimiter(',')->required();
  gb->add_option("--p-in", o.p_in, "within-community edge probability");
  gb->add_option("--p-out", o.p_out, "between-community edge probability");
  gb->add_option("--seed", o.seed, "64-bit seed");
  gb->add_option("--out", o.out, "edge list output (default stdout)");
  gb->add_option("--embeddings-out", o.embeddings_out, "one-hot feature CSV output");
  gb->add_option("--opinions-out", o.opinions_out, "opinions X v output (needs --weights)");
  gb->add_option("--weights", o.weights, "community opinion values v")->delimiter(',');

  auto* sc = app.add_subcommand("ssc-cert", "subset convexity / smoothness certificate");
  sc->add_option("--gamma", o.gamma, "corruption fraction")->required();
  sc->add_option("--sizes", o.sizes, "community sizes (closed form)")->delimiter(',');
  sc->add_option("--embeddings", o.embeddings, "embedding CSV (brute force, n <= 20)");
  sc->add_option("--out", o.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*eq) run_equilibrium(o);
    else if (*st) run_strategic(o);
    else if (*me) run_metrics(o);
    else if (*de) run_detect(o);
    else if (*re) run_recover(o);
    else if (*sa) run_sweep_alpha(o);
    else if (*sf) run_sweep_frac(o);
    else if (*dx) run_detect_exp(o);
    else if (*rx) run_recover_exp(o);
    else if (*gb) run_gen_blockmodel(o);
    else if (*sc) run_ssc_cert(o);
  } catch (const fjgame::Error& e) {
    std::cerr << "error [" << fjgame::to_string(e.kind()) << "]: " << e.what() << '\n';
    return fjgame::is_input_error(e.kind()) ? kExitInput : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
