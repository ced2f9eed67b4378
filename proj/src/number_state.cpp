#include "nsp/number_state.hpp"

#include <limits>
#include <string>

#include "nsp/errors.hpp"

namespace nsp {

Composite space_size(std::span<const Dim> dims) {
  Composite total = 1;
  for (Dim d : dims) {
    if (d == 0) throw DomainError("dimension must be positive");
    if (total > std::numeric_limits<Composite>::max() / d) {
      throw DomainError("composite space overflows 64 bits");
    }
    total *= d;
  }
  return total;
}

NumberState::NumberState(std::vector<Digit> digits, std::vector<Dim> bases)
    : digits_(std::move(digits)), bases_(std::move(bases)) {
  if (digits_.size() != bases_.size()) {
    throw DomainError("number state has " + std::to_string(digits_.size()) + " digits but " +
                      std::to_string(bases_.size()) + " bases");
  }
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (bases_[i] == 0) throw DomainError("site base must be positive");
    if (digits_[i] >= bases_[i]) {
      throw DomainError("digit " + std::to_string(digits_[i]) + " at site " + std::to_string(i) +
                        " is not below base " + std::to_string(bases_[i]));
    }
  }
}

NumberState NumberState::with_base(std::vector<Digit> digits, Dim base) {
  std::vector<Dim> bases(digits.size(), base);
  return NumberState(std::move(digits), std::move(bases));
}

Composite composite_index(std::span<const Digit> digits, std::span<const Dim> bases) {
  if (digits.size() != bases.size()) throw DomainError("digit/base length mismatch");
  space_size(bases);  // overflow guard
  Composite index = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] >= bases[i]) {
      throw DomainError("digit " + std::to_string(digits[i]) + " at position " + std::to_string(i) +
                        " is not below base " + std::to_string(bases[i]));
    }
    index = index * bases[i] + digits[i];
  }
  return index;
}

Composite composite_index(const NumberState& state) {
  return composite_index(state.digits(), state.bases());
}

void decompose_into(Composite index, std::span<const Dim> bases, std::span<Digit> out) {
  if (out.size() != bases.size()) throw DomainError("output buffer length mismatch");
  if (index >= space_size(bases)) {
    throw DomainError("composite index " + std::to_string(index) + " outside the space");
  }
  for (std::size_t i = bases.size(); i-- > 0;) {
    out[i] = static_cast<Digit>(index % bases[i]);
    index /= bases[i];
  }
}

NumberState decompose(Composite index, std::span<const Dim> bases) {
  std::vector<Digit> digits(bases.size());
  decompose_into(index, bases, digits);
  return NumberState(std::move(digits), std::vector<Dim>(bases.begin(), bases.end()));
}

std::vector<Composite> strides_of(std::span<const Dim> dims) {
  std::vector<Composite> strides(dims.size());
  Composite place = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    strides[i] = place;
    place *= dims[i];
  }
  return strides;
}

}  // namespace nsp
