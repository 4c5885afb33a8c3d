#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace netdiff {

using BinaryVector = std::vector<std::uint8_t>;

/// Dense row-major matrix of doubles. Rows are contiguous so kernels can
/// stream them directly.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Copy of the rows listed in `index`, in that order.
  Matrix take_rows(std::span<const std::size_t> index) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix Matrix::take_rows(std::span<const std::size_t> index) const {
  Matrix out(index.size(), cols_);
  for (std::size_t k = 0; k < index.size(); ++k) {
    auto src = row(index[k]);
    auto dst = out.row(k);
    for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
  }
  return out;
}

}  // namespace netdiff
