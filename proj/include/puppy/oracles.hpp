#pragma once

#include <vector>

#include "puppy/diagram.hpp"

namespace puppy {

// Exact sign of (P(x) - pi(y)) . theta(y) at the sample (X, Y): the local
// human and puppy parameters are taken as exact rationals, and a vertex-row
// direction as the exact rational image of its double cosine and sine. A
// floating-point filter settles clear cases; near-zero ones go to GMP.
int exact_dot_sign(const Track& track, double X, double Y);

struct GridOracleReport {
  long samples = 0;
  long mismatches = 0;
  long critical = 0;  // exact zero of the dot product at a sample
  long ties = 0;      // sample within 1e-9 of an arc crossing
};

// Compares the Forward/Backward pattern implied by the arc set against the
// exact pointwise sign on an N x N cell-centred grid over the torus.
GridOracleReport grid_oracle(const AttractionDiagram& d, int N);

// Homology class of a cycle: how many times it winds around the human and the
// puppy directions, from the summed arc displacements on the universal cover.
// A simple closed curve on the torus is contractible iff the class is (0, 0).
struct Winding {
  long human = 0;
  long puppy = 0;
};
Winding cycle_winding(const AttractionDiagram& d, int cycle);

}  // namespace puppy
