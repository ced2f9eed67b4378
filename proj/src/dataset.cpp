#include "nsp/dataset.hpp"

#include <array>

#include "nsp/errors.hpp"
#include "nsp/network.hpp"
#include "nsp/random.hpp"

namespace nsp {

std::string to_string(Problem problem) {
  switch (problem) {
    case Problem::parity: return "parity";
    case Problem::div7: return "div7";
    case Problem::height: return "height";
    case Problem::custom: return "custom";
  }
  return "custom";
}

Problem problem_from_string(const std::string& name) {
  if (name == "parity") return Problem::parity;
  if (name == "div7") return Problem::div7;
  if (name == "height") return Problem::height;
  if (name == "custom") return Problem::custom;
  throw ConfigError("unknown problem '" + name + "'", "problem");
}

Dim site_dim_of(Problem problem) {
  switch (problem) {
    case Problem::parity:
    case Problem::div7: return 2;
    case Problem::height: return 3;
    case Problem::custom: break;
  }
  throw ConfigError("custom problems carry no fixed site dimension", "problem");
}

Dim label_count_of(Problem problem) {
  switch (problem) {
    case Problem::parity: return 2;
    case Problem::div7: return 7;
    case Problem::height: return 3;
    case Problem::custom: break;
  }
  throw ConfigError("custom problems carry no fixed label count", "problem");
}

void Dataset::validate() const {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (s.state.size() != sites) throw DomainError("sample " + std::to_string(k) + " has the wrong length");
    for (Dim b : s.state.bases())
      if (b != site_dim) throw DomainError("sample " + std::to_string(k) + " has the wrong site base");
    if (s.label >= labels) throw DomainError("sample " + std::to_string(k) + " label out of range");
  }
}

Digit ground_truth(Problem problem, std::span<const Digit> digits) {
  if (problem != Problem::custom) {
    const Dim d = site_dim_of(problem);
    for (Digit z : digits) {
      if (z >= d) throw DomainError("digit " + std::to_string(z) + " outside base " + std::to_string(d));
    }
  }
  switch (problem) {
    case Problem::parity: {
      Digit ones = 0;
      for (Digit z : digits) ones += z;
      return ones % 2;
    }
    case Problem::div7: {
      Digit rem = 0;
      for (Digit z : digits) rem = (rem * 2 + z) % 7;
      return rem;
    }
    case Problem::height: {
      long sum = 0;
      for (Digit z : digits) sum += static_cast<long>(z) - 1;
      return sum > 0 ? 0 : (sum == 0 ? 1 : 2);
    }
    case Problem::custom: break;
  }
  throw ConfigError("custom problems have no ground truth", "problem");
}

namespace {

Dataset empty_dataset(Problem problem, std::uint32_t sites, std::uint64_t seed) {
  Dataset ds;
  ds.problem = problem;
  ds.seed = seed;
  ds.sites = sites;
  ds.site_dim = site_dim_of(problem);
  ds.labels = label_count_of(problem);
  return ds;
}

std::vector<Digit> draw_string(Rng& rng, std::uint32_t sites, Dim base) {
  std::vector<Digit> digits(sites);
  for (auto& z : digits) z = static_cast<Digit>(uniform_below(rng, base));
  return digits;
}

Dataset uniform_dataset(Problem problem, std::uint32_t sites, std::size_t n_samp, Rng& rng,
                        std::uint64_t seed) {
  auto ds = empty_dataset(problem, sites, seed);
  ds.samples.reserve(n_samp);
  for (std::size_t k = 0; k < n_samp; ++k) {
    auto digits = draw_string(rng, sites, ds.site_dim);
    const Digit label = ground_truth(problem, digits);
    ds.samples.push_back({NumberState::with_base(std::move(digits), ds.site_dim), label});
  }
  return ds;
}

Dataset stratified_height(std::uint32_t sites, std::size_t n_per_class, Rng& rng, std::uint64_t seed) {
  if (sites < 2) throw ConfigError("height strings need at least 2 sites", "N");
  auto ds = empty_dataset(Problem::height, sites, seed);
  ds.samples.reserve(3 * n_per_class);
  std::array<std::size_t, 3> filled{};
  while (ds.samples.size() < 3 * n_per_class) {
    auto digits = draw_string(rng, sites, 3);
    const Digit label = ground_truth(Problem::height, digits);
    if (filled[label] == n_per_class) continue;
    ++filled[label];
    ds.samples.push_back({NumberState::with_base(std::move(digits), 3), label});
  }
  return ds;
}

Dataset generate_on(Problem problem, std::uint32_t sites, std::size_t count, std::uint64_t seed, Rng& rng) {
  switch (problem) {
    case Problem::parity:
      if (sites < 1) throw ConfigError("parity strings need at least 1 site", "N");
      return uniform_dataset(problem, sites, count, rng, seed);
    case Problem::div7:
      if (sites < 3) throw ConfigError("div7 strings need at least 3 sites", "N");
      return uniform_dataset(problem, sites, count, rng, seed);
    case Problem::height: return stratified_height(sites, count, rng, seed);
    case Problem::custom: break;
  }
  throw ConfigError("custom problems have no generator", "problem");
}

}  // namespace

Dataset gen_parity(std::uint32_t sites, std::size_t n_samp, std::uint64_t seed) {
  return generate(Problem::parity, sites, n_samp, seed);
}

Dataset gen_div7(std::uint32_t sites, std::size_t n_samp, std::uint64_t seed) {
  return generate(Problem::div7, sites, n_samp, seed);
}

Dataset gen_height(std::uint32_t sites, std::size_t n_per_class, std::uint64_t seed) {
  return generate(Problem::height, sites, n_per_class, seed);
}

Dataset generate(Problem problem, std::uint32_t sites, std::size_t count, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::training_data);
  return generate_on(problem, sites, count, seed, rng);
}

Dataset gen_test_set(Problem problem, std::uint32_t sites, std::size_t count, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::test_data);
  return generate_on(problem, sites, count, seed, rng);
}

double exhaustive_accuracy(const Network& net, Problem problem, std::uint32_t sites) {
  const Dim d = site_dim_of(problem);
  if (net.input_sites().size() != sites) throw DomainError("network site count differs from N");
  for (Dim b : net.site_bases())
    if (b != d) throw DomainError("network site base differs from the problem's");
  std::uint64_t total = 1;
  for (std::uint32_t i = 0; i < sites; ++i) {
    total *= d;
    if (total > kExhaustiveCap) {
      throw SizeCapError("exhaustive evaluation of " + std::to_string(d) + "^" + std::to_string(sites) +
                         " strings exceeds the cap; use a sampled test set");
    }
  }
  std::vector<Digit> digits(sites, 0);
  std::vector<Digit> values(net.edge_count());
  std::uint64_t correct = 0;
  for (std::uint64_t k = 0; k < total; ++k) {
    net.evaluate_edges(digits, values);
    if (values[net.output_edge()] == ground_truth(problem, digits)) ++correct;
    // Odometer increment, last site fastest.
    for (std::size_t i = sites; i-- > 0;) {
      if (++digits[i] < d) break;
      digits[i] = 0;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace nsp
