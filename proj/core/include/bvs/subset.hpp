#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bvs/rng.hpp"
#include "bvs/types.hpp"
#include "bvs/wtgs.hpp"

namespace bvs {

// Auxiliary-subset machinery. Each iteration confines the sweep, the
// coordinate draw, and the importance weight to a random size-S subset of the
// coordinates that always contains an anchor set of the A currently
// most-included coordinates, cutting per-iteration cost from O(P) to O(S)
// while the weights keep the estimates exact.

struct SubsetState {
  int S = 0;
  int A = 0;
  std::vector<int> anchor;   // ascending
  std::vector<int> subset;   // ascending, contains anchor
  double ratioInOut = 1.0;   // resample mass of a non-anchor member
};

// Relative conditional mass U(subset | i, anchor) of a subset containing i,
// normalized so subsets pinned by an anchor member carry mass 1. A non-anchor
// i occupies one of the S - A free slots, which concentrates the conditional
// on fewer subsets, each (groundSize - A) / (S - A) times as likely.
// groundSize is P for the linear chain and P + 1 for the count chains, whose
// untempered slot is a permanent anchor member.
double u_ratio(int groundSize, int S, int A, bool iInAnchor);

// Uniform draw over the size-S subsets of {0, ..., P-1} that contain the
// anchor and coordinate i (pass i < 0 to pin the anchor only). Result is
// ascending. Throws ConfigError when the pinned indices do not fit in S.
std::vector<int> sample_subset(int i, std::span<const int> anchor, int P, int S,
                               Rng& rng);

// Allocation-free variant for the chain loops. stamp must have size >= P and
// clock strictly increase between calls; together they form a reusable
// membership mask.
void sample_subset_into(int i, std::span<const int> anchor, int P, int S, Rng& rng,
                        std::vector<std::uint32_t>& stamp, std::uint32_t& clock,
                        std::vector<int>& out);

// Importance-weight denominator over the subset: each member's selection
// weight scaled by its resample mass. condPips aligns with st.subset.
double phi_subset(std::span<const double> condPips, const GammaState& gamma,
                  double epsilon, const SubsetState& st,
                  Variant variant = Variant::Wtgs);

// Top-A coordinates by running inclusion estimate, ties toward the lower
// index, ascending result. Anchor adaptation is a burn-in-only affair; calls
// with t >= burnIn throw ConfigError.
std::vector<int> adapt_anchor(std::span<const double> runningPips, int A, long t,
                              long burnIn);

// Linear-likelihood subset chain. Requires config.subsetSize (and config.h;
// the subset construction has no slot for h refreshes in the linear case).
LinearChainOutput subset_wtgs_run(const Dataset& data, const SamplerConfig& config,
                                  Rng& rng);

}  // namespace bvs
