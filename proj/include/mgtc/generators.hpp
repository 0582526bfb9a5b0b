#pragma once

#include <cstddef>
#include <random>

#include "mgtc/bundle.hpp"

namespace mgtc {

/// Connected random feeder: a random tree over `nodes` hypernodes (node 0 is the slack) with
/// coupled series impedances of 0.002 to 0.02 pu. With `partial_phases`, laterals may drop
/// phases; a child branch never energizes a phase its parent lacks.
NetworkSpec random_network(std::mt19937_64& rng, std::size_t nodes, bool partial_phases = true);

/// Small self-consistent case: random feeder, one load per non-slack node with a random
/// exponent, one PV unit, one battery, random prices. Solvable for the default scenario.
CaseBundle random_case(unsigned long long seed, std::size_t nodes = 4, std::size_t horizon = 4);

}  // namespace mgtc
