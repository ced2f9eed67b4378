#include "nsp/update.hpp"

#include <algorithm>
#include <cmath>

#include "nsp/errors.hpp"

namespace nsp {

namespace {

void check_shape(const Environment& env, const UnitalTensor& current) {
  if (env.rows() != current.rows() || env.cols() != current.cols()) {
    throw DomainError("environment shape differs from the tensor being updated");
  }
}

}  // namespace

UnitalTensor optimal_update(const Environment& env, const UnitalTensor& current) {
  check_shape(env, current);
  auto table = current.table();
  for (std::size_t r = 0; r < env.rows(); ++r) {
    const auto row = env.row(r);
    const auto best = std::max_element(row.begin(), row.end());
    if (*best == 0) continue;
    table[r] = static_cast<std::uint32_t>(best - row.begin());
  }
  return UnitalTensor(current.in_dims(), current.out_dims(), std::move(table));
}

DifferenceMatrix difference_matrix(const Environment& env) {
  if (env.rows() == 0 || env.cols() == 0) throw DomainError("difference matrix of an empty environment");
  DenseMatrix omega(env.rows(), env.cols());
  for (std::size_t r = 0; r < env.rows(); ++r) {
    const auto row = env.row(r);
    const auto top = *std::max_element(row.begin(), row.end());
    for (std::size_t c = 0; c < env.cols(); ++c) {
      omega(r, c) = -static_cast<double>(top - row[c]);
    }
  }
  return {std::move(omega)};
}

TransitionMatrix transition_matrix(const DifferenceMatrix& omega, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("transition matrix needs alpha > 0; use optimal_update for alpha = 0");
  const auto& w = omega.values;
  DenseMatrix p(w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) {
      p(r, c) = std::exp(w(r, c) / alpha);
      sum += p(r, c);
    }
    for (std::size_t c = 0; c < w.cols(); ++c) p(r, c) /= sum;
  }
  return {std::move(p)};
}

UnitalTensor stochastic_update(const Environment& env, double alpha, const UnitalTensor& current, Rng& rng,
                               ZeroRowPolicy zero_rows) {
  if (alpha < 0.0) throw DomainError("alpha must be nonnegative");
  if (alpha == 0.0) return optimal_update(env, current);
  check_shape(env, current);
  const auto p = transition_matrix(difference_matrix(env), alpha).probabilities;
  auto table = current.table();
  for (std::size_t r = 0; r < env.rows(); ++r) {
    if (zero_rows == ZeroRowPolicy::keep && env.row_is_zero(r)) continue;
    const double draw = uniform_unit(rng);
    double cumulative = 0.0;
    std::size_t pick = env.cols() - 1;
    for (std::size_t c = 0; c < env.cols(); ++c) {
      cumulative += p(r, c);
      if (draw < cumulative) {
        pick = c;
        break;
      }
    }
    table[r] = static_cast<std::uint32_t>(pick);
  }
  return UnitalTensor(current.in_dims(), current.out_dims(), std::move(table));
}

}  // namespace nsp
