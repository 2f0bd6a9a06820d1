#include "lingua/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lingua {

void PolicyMatrix::check_row_stochastic(double tol) const {
  if (empty()) return;
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      double v = at(r, c);
      if (!(v >= 0.0)) {
        throw ValidationError("negative or non-finite entry in row " +
                              std::to_string(r));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError("row " + std::to_string(r) + " sums to " +
                            std::to_string(sum));
    }
  }
}

std::size_t PolicyMatrix::row_argmax(std::size_t r) const {
  if (cols_ == 0) throw StructuralError("argmax of empty row");
  std::size_t best = 0;
  double best_v = at(r, 0);
  for (std::size_t c = 1; c < cols_; ++c) {
    if (at(r, c) > best_v) {
      best_v = at(r, c);
      best = c;
    }
  }
  return best;
}

void softmax_inplace(std::span<const double> scores, std::span<double> out) {
  if (scores.size() != out.size()) {
    throw StructuralError("softmax size mismatch");
  }
  if (scores.empty()) return;
  double mx = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(mx)) throw StructuralError("non-finite softmax input");
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  softmax_inplace(scores, out);
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double floor) {
  if (p.size() != q.size()) throw StructuralError("KL length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * std::log(p[i] / std::max(q[i], floor));
  }
  return kl;
}

}  // namespace lingua
