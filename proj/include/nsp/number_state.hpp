#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nsp {

using Digit = std::uint32_t;
using Dim = std::uint32_t;
using Composite = std::uint64_t;

/// Product of the dimensions. Throws DomainError if a dimension is zero or
/// the product overflows 64 bits.
Composite space_size(std::span<const Dim> dims);

/// A product basis state with one definite digit per site.
///
/// Digits are stored with their per-site bases so that a state always
/// knows which tensor product space it lives in.
class NumberState {
 public:
  NumberState() = default;
  /// Throws DomainError when the lengths differ or a digit is not below its base.
  NumberState(std::vector<Digit> digits, std::vector<Dim> bases);

  /// All sites share one base.
  static NumberState with_base(std::vector<Digit> digits, Dim base);

  const std::vector<Digit>& digits() const noexcept { return digits_; }
  const std::vector<Dim>& bases() const noexcept { return bases_; }
  std::size_t size() const noexcept { return digits_.size(); }
  Digit operator[](std::size_t site) const { return digits_[site]; }

  friend bool operator==(const NumberState&, const NumberState&) = default;

 private:
  std::vector<Digit> digits_;
  std::vector<Dim> bases_;
};

/// Mixed-radix index of a digit tuple; the first site is most significant.
Composite composite_index(std::span<const Digit> digits, std::span<const Dim> bases);
Composite composite_index(const NumberState& state);

/// Inverse of composite_index.
NumberState decompose(Composite index, std::span<const Dim> bases);

/// Allocation-free decomposition into a caller-provided buffer.
void decompose_into(Composite index, std::span<const Dim> bases, std::span<Digit> out);

/// Place values of each position under the mixed-radix convention.
std::vector<Composite> strides_of(std::span<const Dim> dims);

}  // namespace nsp
