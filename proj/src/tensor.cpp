#include "nsp/tensor.hpp"

#include <cmath>
#include <string>

#include "nsp/errors.hpp"

namespace nsp {

namespace {

constexpr double kPredicateTolerance = 1e-12;

void check_table(std::span<const std::uint32_t> table, std::size_t rows, std::size_t cols,
                 bool allow_null) {
  if (table.size() != rows) {
    throw DomainError("table has " + std::to_string(table.size()) + " rows, input space has " +
                      std::to_string(rows));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (allow_null && table[r] == PartialNspTensor::null_row) continue;
    if (table[r] >= cols) {
      throw DomainError("row " + std::to_string(r) + " maps to column " + std::to_string(table[r]) +
                        " outside an output space of " + std::to_string(cols));
    }
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw DomainError("dense matrix data size mismatch");
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DomainError("matrix product shape mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

UnitalTensor::UnitalTensor(std::vector<Dim> in_dims, std::vector<Dim> out_dims,
                           std::vector<std::uint32_t> table)
    : in_dims_(std::move(in_dims)), out_dims_(std::move(out_dims)), table_(std::move(table)) {
  const Composite rows = space_size(in_dims_);
  cols_ = space_size(out_dims_);
  if (cols_ > 0xfffffffeu) throw DomainError("output space too large for a lookup table");
  check_table(table_, rows, cols_, false);
}

UnitalTensor UnitalTensor::identity(std::vector<Dim> dims) {
  const Composite n = space_size(dims);
  std::vector<std::uint32_t> table(n);
  for (Composite i = 0; i < n; ++i) table[i] = static_cast<std::uint32_t>(i);
  return UnitalTensor(dims, dims, std::move(table));
}

UnitalTensor UnitalTensor::constant(std::vector<Dim> in_dims, std::vector<Dim> out_dims,
                                    std::uint32_t column) {
  std::vector<std::uint32_t> table(space_size(in_dims), column);
  return UnitalTensor(std::move(in_dims), std::move(out_dims), std::move(table));
}

DenseMatrix UnitalTensor::dense() const {
  DenseMatrix m(rows(), cols());
  for (std::size_t r = 0; r < rows(); ++r) m(r, table_[r]) = 1.0;
  return m;
}

PartialNspTensor::PartialNspTensor(std::vector<Dim> in_dims, std::vector<Dim> out_dims,
                                   std::vector<std::uint32_t> table)
    : in_dims_(std::move(in_dims)), out_dims_(std::move(out_dims)), table_(std::move(table)) {
  cols_ = space_size(out_dims_);
  check_table(table_, space_size(in_dims_), cols_, true);
}

PartialNspTensor::PartialNspTensor(const UnitalTensor& t)
    : PartialNspTensor(t.in_dims(), t.out_dims(), t.table()) {}

bool PartialNspTensor::is_total() const {
  for (auto v : table_)
    if (v == null_row) return false;
  return true;
}

std::optional<NumberState> PartialNspTensor::apply(const NumberState& in_state) const {
  if (in_state.bases() != in_dims_) throw DomainError("input state bases differ from tensor input dims");
  const auto image = table_[composite_index(in_state)];
  if (image == null_row) return std::nullopt;
  return decompose(image, out_dims_);
}

DenseMatrix PartialNspTensor::dense() const {
  DenseMatrix m(table_.size(), cols_);
  for (std::size_t r = 0; r < table_.size(); ++r)
    if (table_[r] != null_row) m(r, table_[r]) = 1.0;
  return m;
}

TensorClassReport classify_tensor(const DenseMatrix& m) {
  TensorClassReport report;
  bool nsp = true;
  bool unital = true;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t support = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (v != 0.0) ++support;
      if (v != 0.0 && v != 1.0) unital = false;
    }
    if (support > 1) nsp = false;
    if (support != 1) unital = false;
  }
  report.is_nsp = nsp;
  report.is_unital = nsp && unital;

  bool one_norm = true;
  for (std::size_t c = 0; c < m.cols() && one_norm; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) sum += m(r, c);
    if (std::abs(sum - 1.0) > kPredicateTolerance) one_norm = false;
  }
  report.is_unit_one_norm = one_norm;

  bool isometric = m.rows() >= m.cols();
  if (isometric) {
    const DenseMatrix gram = m.transpose() * m;
    for (std::size_t i = 0; i < gram.rows() && isometric; ++i)
      for (std::size_t j = 0; j < gram.cols(); ++j) {
        const double expected = i == j ? 1.0 : 0.0;
        if (std::abs(gram(i, j) - expected) > kPredicateTolerance) {
          isometric = false;
          break;
        }
      }
  }
  report.is_isometric = isometric;
  return report;
}

NumberState apply_tensor(const UnitalTensor& t, const NumberState& in_state) {
  if (in_state.bases() != t.in_dims()) {
    throw DomainError("input state bases differ from tensor input dims");
  }
  return decompose(t[composite_index(in_state)], t.out_dims());
}

UnitalTensor compose(const UnitalTensor& first, const UnitalTensor& second) {
  if (first.out_dims() != second.in_dims()) throw DomainError("composition dims mismatch");
  std::vector<std::uint32_t> table(first.rows());
  for (std::size_t r = 0; r < first.rows(); ++r) table[r] = second[first[r]];
  return UnitalTensor(first.in_dims(), second.out_dims(), std::move(table));
}

UnitalTensor random_unital(std::vector<Dim> in_dims, std::vector<Dim> out_dims, Rng& rng) {
  const Composite rows = space_size(in_dims);
  const Composite cols = space_size(out_dims);
  std::vector<std::uint32_t> table(rows);
  for (auto& entry : table) entry = static_cast<std::uint32_t>(uniform_below(rng, cols));
  return UnitalTensor(std::move(in_dims), std::move(out_dims), std::move(table));
}

}  // namespace nsp
