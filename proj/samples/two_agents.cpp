// Two agents, one edge, alpha = 1/2, intrinsic opinions (1, 0).
// Prints the truthful equilibrium, the misreporting equilibrium when both
// agents misreport, and the resulting price of misreporting.

#include <iostream>

#include "fjgame/fjgame.hpp"

int main() {
  using namespace fjgame;
  const WeightedGraph g(2, {{0, 1, 1.0}});
  const ResponseMatrix b(g, 0.5);
  const TrueOpinions s(Eigen::Vector2d(1.0, 0.0));

  const ExpressedOpinions z = fj_equilibrium(b, s);
  const StrategicOutcome out = strategic_equilibrium(b, s, StrategicSet::all(2));

  std::cout << "truthful z   = " << z.values().transpose() << '\n';
  std::cout << "reported s'  = " << out.s_prime.values().transpose() << '\n';
  std::cout << "strategic z' = " << out.z_prime.values().transpose() << '\n';
  std::cout << "PoM          = " << pom(out.z_prime, z, s, g, b.susceptibility()) << '\n';
  std::cout << "max |grad|   = " << out.max_gradient << '\n';
}
