#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsp/number_state.hpp"

namespace nsp {

class Network;

enum class Problem { parity, div7, height, custom };

std::string to_string(Problem problem);
/// Throws ConfigError for unknown names.
Problem problem_from_string(const std::string& name);

/// Site dimension d and label count c of a benchmark problem.
Dim site_dim_of(Problem problem);
Dim label_count_of(Problem problem);

struct LabeledSample {
  NumberState state;
  Digit label = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  Problem problem = Problem::custom;
  std::uint64_t seed = 0;
  std::uint32_t sites = 0;
  Dim site_dim = 0;
  Dim labels = 0;
  /// Samples are drawn with replacement and never deduplicated against other sets.
  bool with_replacement = true;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  /// Throws DomainError if any sample disagrees with the metadata.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Ground-truth label of a digit string. Height digits 0, 1, 2 encode the
/// values -1, 0, +1; labels 0, 1, 2 mean positive, zero and negative sums.
/// Div-7 reads the string as a binary integer, first digit most significant.
Digit ground_truth(Problem problem, std::span<const Digit> digits);

/// Uniform binary strings labelled by the parity of their ones.
Dataset gen_parity(std::uint32_t sites, std::size_t n_samp, std::uint64_t seed);

/// Uniform binary strings labelled by their value mod 7.
Dataset gen_div7(std::uint32_t sites, std::size_t n_samp, std::uint64_t seed);

/// Rejection sampling of uniform {-1, 0, 1} strings until each label class
/// holds exactly `n_per_class` samples.
Dataset gen_height(std::uint32_t sites, std::size_t n_per_class, std::uint64_t seed);

/// Generator dispatch; `count` is n_samp for parity/div7 and n_per_class for height.
Dataset generate(Problem problem, std::uint32_t sites, std::size_t count, std::uint64_t seed);

/// Same generator on a stream independent of the training stream for `seed`.
Dataset gen_test_set(Problem problem, std::uint32_t sites, std::size_t count, std::uint64_t seed);

/// Largest input space exhaustive evaluation will enumerate.
inline constexpr std::uint64_t kExhaustiveCap = std::uint64_t{1} << 20;

/// Fraction of all d^N strings the network labels correctly. Throws
/// SizeCapError beyond kExhaustiveCap.
double exhaustive_accuracy(const Network& net, Problem problem, std::uint32_t sites);

}  // namespace nsp
