#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "twisttube/sparse.hpp"

namespace twisttube {

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // unit-norm columns
  std::vector<double> residuals;    // ||M x - lambda x||
  int iterations = 0;
  bool converged = false;

  std::size_t size() const { return eigenvalues.size(); }
  bool empty() const { return eigenvalues.empty(); }
};

// Applies an approximate inverse to a block of residuals in place.
using BlockPreconditioner = std::function<void(Eigen::MatrixXd&)>;

struct EigenOptions {
  // Residual test: ||r|| <= tol (1 + |lambda|) scale(M).
  double tol = 1e-10;
  int max_iterations = 5000;
  int block_size = 0;  // 0: max(2m, 8)
  std::uint64_t seed = 42;
  int dense_threshold = 1000;  // n <= this uses the dense solver
  // Optional leading columns of the initial block; the rest is pseudorandom.
  Eigen::MatrixXd initial_guess;
  // Defaults to the Jacobi (diagonal) preconditioner when empty.
  BlockPreconditioner preconditioner;
  int verbosity = 0;
};

// m lowest eigenpairs. Dense when n <= dense_threshold, otherwise LOBPCG.
// Throws NoConvergence.
Spectrum smallest_eigs(const SparseSymOperator& m_op, int m, const EigenOptions& options = {});

// Always LOBPCG regardless of size.
Spectrum lobpcg(const SparseSymOperator& m_op, int m, const EigenOptions& options = {});

// Dense eigendecomposition; the reference the iterative path is checked against.
Spectrum dense_smallest_eigs(const SparseSymOperator& m_op, int m);

// Entries of a unit ground state with |f| <= kUnderflowFraction * max f are
// numerically zero: tunnelling through thin necks pushes the true values
// below what double precision resolves.
inline constexpr double kUnderflowFraction = 1e-9;

struct GroundState {
  double energy = 0.0;
  Eigen::VectorXd f;        // unit norm, positive mean
  double min_value = 0.0;   // positivity margin
  int iterations = 0;
  // Eigenvalues within the cluster tolerance of the lowest one. Above 1 the
  // domain splits into wells with negligible tunnelling; f is the projection
  // of the constant vector onto the cluster (the symmetric combination).
  int cluster_size = 1;
  int underflow_count = 0;  // entries in [-t, t], t = kUnderflowFraction max f
  Spectrum low;             // the computed low spectrum, cluster polished
};

// Lowest eigenpair (cluster), refined by block inverse iteration.
// Throws NonPositiveGroundState if f has an entry below -t.
GroundState ground_state(const SparseSymOperator& h, const EigenOptions& options = {});

// Threshold below which entries of f count as numerically zero.
double underflow_threshold(const Eigen::VectorXd& f);

// Refines the leading `count` eigenpairs of s by subspace inverse iteration
// with a sparse LDL^T factorisation of M - shift I, shift just below the
// lowest eigenvalue. Needs count < s.size() (the next eigenvalue sets the shift).
void polish(const SparseSymOperator& m_op, Spectrum& s, int count, int sweeps = 4);

// Every eigenvalue below `threshold`, found by requesting 4, 8, 16, ...
// lowest pairs until one at or above the threshold shows up.
// Throws CapExceeded when `cap` pairs are all below it.
Spectrum eigs_below(const SparseSymOperator& m_op, double threshold, int cap,
                    const EigenOptions& options = {});

// Eigenvalues < -1e-10 scale(H).
Spectrum negative_eigs(const SparseSymOperator& h_op, int cap, const EigenOptions& options = {});

double negative_tolerance(const SparseSymOperator& h_op);

}  // namespace twisttube
