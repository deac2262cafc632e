#include "nsir/linalg.hpp"

#include <cmath>
#include <string>

#include "nsir/error.hpp"

namespace nsir {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
  rows_ = init.size();
  cols_ = rows_ == 0 ? 0 : init.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : init) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::ShapeMismatch, "ragged matrix initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) {
      throw Error(ErrorCode::ShapeMismatch,
                  "row " + std::to_string(r) + " has dimension " +
                      std::to_string(rows[r].size()) + ", expected " +
                      std::to_string(m.cols_));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dot of " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector normalized(std::span<const double> v, double min_norm) {
  const double n = l2_norm(v);
  if (!(n >= min_norm)) {
    throw Error(ErrorCode::DegenerateFusion,
                "vector norm " + std::to_string(n) + " below " +
                    std::to_string(min_norm));
  }
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace nsir
