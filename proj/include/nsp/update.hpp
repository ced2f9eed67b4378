#pragma once

#include "nsp/contraction.hpp"
#include "nsp/random.hpp"
#include "nsp/tensor.hpp"

namespace nsp {

/// Row-shifted environment: each entry minus its row maximum. Every row
/// holds at least one zero and no positive entries.
struct DifferenceMatrix {
  DenseMatrix values;
};

/// Row-softmax of a difference matrix at a fixed temperature.
struct TransitionMatrix {
  DenseMatrix probabilities;
};

/// Greedy single-tensor update. Each row with a nonzero count takes the
/// smallest column attaining the row maximum; all-zero rows keep the
/// current mapping. Throws DomainError on a shape mismatch.
UnitalTensor optimal_update(const Environment& env, const UnitalTensor& current);

DifferenceMatrix difference_matrix(const Environment& env);

/// p_ij = exp(omega_ij / alpha) / sum_j exp(omega_ij / alpha). Throws
/// DomainError unless alpha > 0.
TransitionMatrix transition_matrix(const DifferenceMatrix& omega, double alpha);

/// Treatment of all-zero environment rows by the stochastic update.
enum class ZeroRowPolicy {
  /// Keep the current mapping, as the greedy update does.
  keep,
  /// Draw from the transition row, which is uniform for a zero row.
  resample,
};

/// alpha == 0 gives optimal_update. Otherwise each row draws its column
/// from the transition row; all-zero rows follow `zero_rows`.
UnitalTensor stochastic_update(const Environment& env, double alpha, const UnitalTensor& current, Rng& rng,
                               ZeroRowPolicy zero_rows = ZeroRowPolicy::keep);

}  // namespace nsp
