#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nsp/number_state.hpp"
#include "nsp/random.hpp"

namespace nsp {

/// Row-major dense matrix of doubles. Only used for predicates and oracles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  DenseMatrix transpose() const;
  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// An oriented number-state preserving tensor with 0/1 entries and exactly
/// one unit per row of its input-output matrix, stored as the row -> column
/// map. Input composites index rows, output composites index columns.
class UnitalTensor {
 public:
  UnitalTensor() = default;
  /// Throws DomainError if the table length differs from the input space
  /// size or an entry is outside the output space.
  UnitalTensor(std::vector<Dim> in_dims, std::vector<Dim> out_dims, std::vector<std::uint32_t> table);

  static UnitalTensor identity(std::vector<Dim> dims);
  /// Every input maps to output composite `column`.
  static UnitalTensor constant(std::vector<Dim> in_dims, std::vector<Dim> out_dims, std::uint32_t column = 0);

  const std::vector<Dim>& in_dims() const noexcept { return in_dims_; }
  const std::vector<Dim>& out_dims() const noexcept { return out_dims_; }
  std::size_t rows() const noexcept { return table_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<std::uint32_t>& table() const noexcept { return table_; }
  std::uint32_t operator[](std::size_t row) const { return table_[row]; }

  DenseMatrix dense() const;

  friend bool operator==(const UnitalTensor&, const UnitalTensor&) = default;

 private:
  std::vector<Dim> in_dims_;
  std::vector<Dim> out_dims_;
  std::size_t cols_ = 0;
  std::vector<std::uint32_t> table_;
};

/// Number-state preserving tensor whose rows may be null (map to the norm
/// zero state). Exists for predicates and oracles; training never produces one.
class PartialNspTensor {
 public:
  static constexpr std::uint32_t null_row = 0xffffffffu;

  PartialNspTensor(std::vector<Dim> in_dims, std::vector<Dim> out_dims, std::vector<std::uint32_t> table);
  explicit PartialNspTensor(const UnitalTensor& t);

  const std::vector<Dim>& in_dims() const noexcept { return in_dims_; }
  const std::vector<Dim>& out_dims() const noexcept { return out_dims_; }
  const std::vector<std::uint32_t>& table() const noexcept { return table_; }
  bool is_total() const;

  /// Empty when the input row is null.
  std::optional<NumberState> apply(const NumberState& in_state) const;
  DenseMatrix dense() const;

 private:
  std::vector<Dim> in_dims_;
  std::vector<Dim> out_dims_;
  std::size_t cols_ = 0;
  std::vector<std::uint32_t> table_;
};

struct TensorClassReport {
  bool is_nsp = false;
  bool is_unital = false;
  bool is_unit_one_norm = false;
  bool is_isometric = false;
};

/// Classifies an input-output matrix against the tensor class definitions.
TensorClassReport classify_tensor(const DenseMatrix& m);

/// Throws DomainError if the state's bases differ from the tensor's input dims.
NumberState apply_tensor(const UnitalTensor& t, const NumberState& in_state);

/// Input-output matrix product of a chain; the result is again unital.
UnitalTensor compose(const UnitalTensor& first, const UnitalTensor& second);

/// Each row's image drawn independently and uniformly from the output space.
UnitalTensor random_unital(std::vector<Dim> in_dims, std::vector<Dim> out_dims, Rng& rng);

}  // namespace nsp
