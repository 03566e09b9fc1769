#pragma once

#include "aspem/hin.hpp"
#include "aspem/subaspect.hpp"

namespace aspem {

// Per-center inconsistency between the two sides of a sub-aspect:
// sum-of-max over sum-of-min of pairwise dot products of the
// center-outward row-normalized adjacencies, minus one. Centers with an
// empty row on either side have a zero denominator and are excluded.
struct GammaResult {
  bool excluded = false;
  double value = 0.0;
};
GammaResult gamma(const HIN& hin, NodeId u, const SubAspect& s);

// Mean of gamma over the non-excluded centers; 0 with a warning when no
// center qualifies. Workers split the center set into contiguous chunks
// whose partial sums are reduced in chunk order.
double inc_simple(const HIN& hin, const SubAspect& s, int workers = 1);

// inc_simple for every sub-aspect of the schema.
ScoreTable compute_scores(const HIN& hin, int workers = 1);

}  // namespace aspem
