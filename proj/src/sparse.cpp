#include "twisttube/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace twisttube {

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<std::int64_t> row_ptr,
                     std::vector<int> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != static_cast<std::size_t>(rows_) + 1 ||
      col_idx_.size() != values_.size() ||
      row_ptr_.back() != static_cast<std::int64_t>(values_.size())) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  assert(static_cast<int>(x.size()) == cols_ && static_cast<int>(y.size()) == rows_);
  for (int r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      acc += values_[k] * x[col_idx_[k]];
    }
    y[r] = acc;
  }
}

Eigen::VectorXd CsrMatrix::operator*(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(rows_);
  multiply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
  return y;
}

Eigen::MatrixXd CsrMatrix::operator*(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y(rows_, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    multiply(std::span<const double>(x.col(c).data(), x.rows()),
             std::span<double>(y.col(c).data(), rows_));
  }
  return y;
}

double CsrMatrix::coeff(int r, int c) const {
  const auto begin = col_idx_.begin() + row_ptr_[r];
  const auto end = col_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Eigen::VectorXd CsrMatrix::diagonal() const {
  Eigen::VectorXd d(std::min(rows_, cols_));
  for (int r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
  return d;
}

double CsrMatrix::max_abs_row_sum() const {
  double best = 0.0;
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(cols_) + 1, 0);
  for (int c : col_idx_) ++ptr[c + 1];
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  std::vector<int> idx(values_.size());
  std::vector<double> val(values_.size());
  std::vector<std::int64_t> fill(ptr.begin(), ptr.end() - 1);
  for (int r = 0; r < rows_; ++r) {
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto dst = fill[col_idx_[k]]++;
      idx[dst] = r;
      val[dst] = values_[k];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) += values_[k];
  }
  return d;
}

void TripletAccumulator::add(int r, int c, double v) {
  assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
  entries_.push_back({r, c, v});
}

CsrMatrix TripletAccumulator::build() const {
  std::vector<Entry> sorted = entries_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(rows_) + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  idx.reserve(sorted.size());
  val.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size();) {
    const int r = sorted[k].r;
    const int c = sorted[k].c;
    double sum = 0.0;
    while (k < sorted.size() && sorted[k].r == r && sorted[k].c == c) sum += sorted[k++].v;
    idx.push_back(c);
    val.push_back(sum);
    ++ptr[r + 1];
  }
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  return CsrMatrix(rows_, cols_, std::move(ptr), std::move(idx), std::move(val));
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::laplacian: return "laplacian";
    case Provenance::angular_gram: return "angular-gram";
    case Provenance::h_beta0: return "h_beta0";
    case Provenance::H_of_s: return "H_of_s";
    case Provenance::H_3d: return "H_3d";
    case Provenance::generic: return "generic";
  }
  return "generic";
}

double max_asymmetry(const CsrMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  const auto& ptr = m.row_ptr();
  const auto& idx = m.col_idx();
  const auto& val = m.values();
  for (int r = 0; r < m.rows(); ++r) {
    for (std::int64_t k = ptr[r]; k < ptr[r + 1]; ++k) {
      worst = std::max(worst, std::abs(val[k] - m.coeff(idx[k], r)));
    }
  }
  return worst;
}

SparseSymOperator::SparseSymOperator(CsrMatrix matrix, Provenance provenance)
    : matrix_(std::move(matrix)), provenance_(provenance) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("symmetric operator must be square");
  }
  asymmetry_ = max_asymmetry(matrix_);
  scale_ = matrix_.max_abs_row_sum();
}

CsrMatrix gram(const CsrMatrix& b, double weight) {
  const auto& ptr = b.row_ptr();
  const auto& idx = b.col_idx();
  const auto& val = b.values();
  TripletAccumulator acc(b.cols(), b.cols());
  std::size_t count = 0;
  for (int r = 0; r < b.rows(); ++r) {
    const auto len = static_cast<std::size_t>(ptr[r + 1] - ptr[r]);
    count += len * len;
  }
  acc.reserve(count);
  for (int r = 0; r < b.rows(); ++r) {
    for (std::int64_t p = ptr[r]; p < ptr[r + 1]; ++p) {
      for (std::int64_t q = ptr[r]; q < ptr[r + 1]; ++q) {
        acc.add(idx[p], idx[q], val[p] * val[q]);
      }
    }
  }
  CsrMatrix g = acc.build();
  if (weight == 1.0) return g;
  std::vector<double> scaled = g.values();
  for (double& v : scaled) v *= weight;
  return CsrMatrix(g.rows(), g.cols(), g.row_ptr(), g.col_idx(), std::move(scaled));
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double weight) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix sizes differ");
  }
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  idx.reserve(a.nonzeros() + b.nonzeros());
  val.reserve(a.nonzeros() + b.nonzeros());
  for (int r = 0; r < a.rows(); ++r) {
    std::int64_t ka = a.row_ptr()[r];
    std::int64_t kb = b.row_ptr()[r];
    const std::int64_t ea = a.row_ptr()[r + 1];
    const std::int64_t eb = b.row_ptr()[r + 1];
    while (ka < ea || kb < eb) {
      const int ca = ka < ea ? a.col_idx()[ka] : a.cols();
      const int cb = kb < eb ? b.col_idx()[kb] : b.cols();
      if (ca < cb) {
        idx.push_back(ca);
        val.push_back(a.values()[ka++]);
      } else if (cb < ca) {
        idx.push_back(cb);
        val.push_back(weight * b.values()[kb++]);
      } else {
        idx.push_back(ca);
        val.push_back(a.values()[ka++] + weight * b.values()[kb++]);
      }
    }
    ptr[r + 1] = static_cast<std::int64_t>(val.size());
  }
  return CsrMatrix(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

CsrMatrix add_diagonal(const CsrMatrix& m, const Eigen::VectorXd& d) {
  const int n = m.rows();
  std::vector<int> diag_idx(n);
  std::iota(diag_idx.begin(), diag_idx.end(), 0);
  std::vector<std::int64_t> dptr(static_cast<std::size_t>(n) + 1);
  std::iota(dptr.begin(), dptr.end(), 0);
  CsrMatrix diag(n, n, std::move(dptr), std::move(diag_idx),
                 std::vector<double>(d.data(), d.data() + d.size()));
  return add(m, diag);
}

void write_coordinate_text(const CsrMatrix& m, std::ostream& out) {
  out << fmt::format("% {} {} {}\n", m.rows(), m.cols(), m.nonzeros());
  for (int r = 0; r < m.rows(); ++r) {
    for (std::int64_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      out << fmt::format("{} {} {:.17g}\n", r, m.col_idx()[k], m.values()[k]);
    }
  }
}

}  // namespace twisttube
