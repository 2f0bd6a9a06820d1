#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lingua {

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row-stochastic conditional distribution: one probability row per
/// conditioning value, one column per outcome value.
class PolicyMatrix {
 public:
  PolicyMatrix() = default;
  PolicyMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static PolicyMatrix uniform(std::size_t rows, std::size_t cols) {
    if (cols == 0) return PolicyMatrix(rows, 0);
    return PolicyMatrix(rows, cols, 1.0 / static_cast<double>(cols));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  /// Throws ValidationError unless every row sums to 1 within `tol` with
  /// non-negative entries.
  void check_row_stochastic(double tol = 1e-9) const;

  /// Index of the largest entry in row r, lowest index on ties.
  std::size_t row_argmax(std::size_t r) const;

  bool operator==(const PolicyMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Normalised exponential of `scores` written into `out`, computed with
/// max-subtraction. Spans may alias.
void softmax_inplace(std::span<const double> scores, std::span<double> out);

std::vector<double> softmax(std::span<const double> scores);

/// KL(p || q) with q floored at `floor` before the log and 0*log(0/q) := 0.
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double floor = 1e-12);

}  // namespace lingua
