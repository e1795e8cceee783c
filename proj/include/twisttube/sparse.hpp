#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace twisttube {

// Compressed sparse rows with sorted, duplicate-free column indices.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols, std::vector<std::int64_t> row_ptr, std::vector<int> col_idx,
            std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  // y = M x
  void multiply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd operator*(const Eigen::MatrixXd& x) const;

  double coeff(int r, int c) const;
  Eigen::VectorXd diagonal() const;
  double max_abs_row_sum() const;
  CsrMatrix transpose() const;
  Eigen::MatrixXd to_dense() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

// Collects (row, col, value) contributions and sums duplicates in insertion
// order, so mirrored contributions added in the same sequence produce
// bit-identical mirrored entries.
class TripletAccumulator {
 public:
  TripletAccumulator(int rows, int cols) : rows_(rows), cols_(cols) {}
  void reserve(std::size_t n) { entries_.reserve(n); }
  void add(int r, int c, double v);
  CsrMatrix build() const;

 private:
  struct Entry {
    int r;
    int c;
    double v;
  };
  int rows_;
  int cols_;
  std::vector<Entry> entries_;
};

enum class Provenance { laplacian, angular_gram, h_beta0, H_of_s, H_3d, generic };

std::string_view to_string(Provenance p);

// Symmetric operator; the asymmetry certificate max|M - M^T| is computed at
// construction and is zero for every operator assembled by this library.
class SparseSymOperator {
 public:
  SparseSymOperator() = default;
  SparseSymOperator(CsrMatrix matrix, Provenance provenance);

  int dim() const { return matrix_.rows(); }
  const CsrMatrix& matrix() const { return matrix_; }
  Provenance provenance() const { return provenance_; }
  double asymmetry() const { return asymmetry_; }
  // max row sum of |M|, the scale used in residual tolerances
  double scale() const { return scale_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }

 private:
  CsrMatrix matrix_;
  Provenance provenance_ = Provenance::generic;
  double asymmetry_ = 0.0;
  double scale_ = 0.0;
};

// No symmetry requirement (the central-difference angular factor).
struct SparseOperator {
  CsrMatrix matrix;
};

double max_asymmetry(const CsrMatrix& m);

// weight * B^T B accumulated row by row of B.
CsrMatrix gram(const CsrMatrix& b, double weight = 1.0);

// Entrywise a + weight * b, both square of equal size.
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double weight = 1.0);

// m + diag(d)
CsrMatrix add_diagonal(const CsrMatrix& m, const Eigen::VectorXd& d);

// Coordinate text: one "row col value" line per stored entry.
void write_coordinate_text(const CsrMatrix& m, std::ostream& out);

}  // namespace twisttube
