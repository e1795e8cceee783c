#include "twisttube/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "twisttube/errors.hpp"

namespace twisttube {

namespace {

// Orthonormalises `v` against the orthonormal columns of `q` and against
// itself (two Gram-Schmidt passes), dropping numerically dependent columns.
Eigen::MatrixXd orthonormalize_against(const Eigen::MatrixXd& q, Eigen::MatrixXd v) {
  const Eigen::Index n = v.rows();
  Eigen::MatrixXd out(n, v.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::VectorXd x = v.col(c);
    const double original = x.norm();
    if (!(original > 0.0) || !std::isfinite(original)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (q.cols() > 0) x.noalias() -= q * (q.transpose() * x);
      if (kept > 0) x.noalias() -= out.leftCols(kept) * (out.leftCols(kept).transpose() * x);
    }
    const double norm = x.norm();
    if (norm <= 1e-10 * original) continue;
    out.col(kept++) = x / norm;
  }
  return out.leftCols(kept);
}

Spectrum finish(const SparseSymOperator& op, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& lambda, int m, int iterations, bool converged) {
  Spectrum s;
  s.eigenvectors = x.leftCols(m);
  s.eigenvalues.assign(lambda.data(), lambda.data() + m);
  const Eigen::MatrixXd mx = op.matrix() * s.eigenvectors;
  for (int i = 0; i < m; ++i) {
    s.residuals.push_back((mx.col(i) - lambda[i] * s.eigenvectors.col(i)).norm());
  }
  s.iterations = iterations;
  s.converged = converged;
  return s;
}

BlockPreconditioner jacobi(const SparseSymOperator& op) {
  Eigen::VectorXd inv = op.matrix().diagonal();
  const double floor = 1e-14 * std::max(op.scale(), 1e-300);
  for (Eigen::Index k = 0; k < inv.size(); ++k) inv[k] = 1.0 / std::max(std::abs(inv[k]), floor);
  return [inv](Eigen::MatrixXd& r) { r = inv.asDiagonal() * r; };
}

}  // namespace

Spectrum dense_smallest_eigs(const SparseSymOperator& op, int m) {
  const int n = op.dim();
  m = std::clamp(m, 0, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix().to_dense());
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("dense symmetric eigensolver failed", 0, 0.0);
  }
  return finish(op, solver.eigenvectors(), solver.eigenvalues(), m, 0, true);
}

Spectrum lobpcg(const SparseSymOperator& op, int m, const EigenOptions& options) {
  const int n = op.dim();
  if (m < 1) throw InvalidSpec("number of requested eigenpairs must be positive");
  if (m > n) throw InvalidSpec(fmt::format("requested {} eigenpairs of a {}x{} operator", m, n, n));
  if (!(options.tol > 0.0)) throw InvalidSpec("eigensolver tolerance must be positive");

  const int b = std::min(options.block_size > 0 ? std::max(options.block_size, m)
                                                : std::max(2 * m, 8),
                         n);
  if (3 * b >= n) return dense_smallest_eigs(op, m);

  const CsrMatrix& mat = op.matrix();
  const double scale = std::max(op.scale(), 1e-300);
  const BlockPreconditioner precondition =
      options.preconditioner ? options.preconditioner : jacobi(op);

  // Initial block: caller-supplied columns first, then a fixed-seed normal block.
  Eigen::MatrixXd x0(n, b);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index guess_cols =
      options.initial_guess.rows() == n ? std::min<Eigen::Index>(options.initial_guess.cols(), b)
                                        : 0;
  for (Eigen::Index c = 0; c < b; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) x0(r, c) = normal(rng);
  }
  if (guess_cols > 0) x0.leftCols(guess_cols) = options.initial_guess.leftCols(guess_cols);
  Eigen::MatrixXd x = orthonormalize_against(Eigen::MatrixXd(n, 0), x0);
  if (x.cols() < b) {
    // Dependent guess columns: top up with fresh random directions.
    Eigen::MatrixXd extra(n, b);
    for (Eigen::Index c = 0; c < b; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) extra(r, c) = normal(rng);
    }
    Eigen::MatrixXd more = orthonormalize_against(x, extra);
    Eigen::MatrixXd joined(n, b);
    joined << x, more.leftCols(b - x.cols());
    x = joined;
  }

  // Initial Rayleigh-Ritz.
  Eigen::MatrixXd mx = mat * x;
  Eigen::VectorXd lambda;
  {
    Eigen::MatrixXd g = x.transpose() * mx;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(g);
    x = (x * rr.eigenvectors()).eval();
    mx = (mx * rr.eigenvectors()).eval();
    lambda = rr.eigenvalues();
  }

  Eigen::MatrixXd p(n, 0);
  double worst = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Eigen::MatrixXd r = mx - x * lambda.asDiagonal();
    std::vector<Eigen::Index> active;
    worst = 0.0;
    bool done = true;
    for (int i = 0; i < b; ++i) {
      const double res = r.col(i).norm();
      const double target = options.tol * (1.0 + std::abs(lambda[i])) * scale;
      if (i < m) {
        worst = std::max(worst, res / ((1.0 + std::abs(lambda[i])) * scale));
        if (res > target) done = false;
      }
      if (res > target) active.push_back(i);
    }
    if (options.verbosity > 1 && it % 100 == 0) {
      std::cerr << fmt::format("lobpcg it={} lambda0={:.12g} worst_rel_res={:.3e}\n", it,
                               lambda[0], worst);
    }
    if (done) return finish(op, x, lambda, m, it, true);

    Eigen::MatrixXd w(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) w.col(a) = r.col(active[a]);
    precondition(w);
    w = orthonormalize_against(x, std::move(w));
    Eigen::MatrixXd xw(n, x.cols() + w.cols());
    xw << x, w;
    p = orthonormalize_against(xw, std::move(p));

    const Eigen::Index k = x.cols() + w.cols() + p.cols();
    Eigen::MatrixXd s(n, k);
    s << x, w, p;
    Eigen::MatrixXd ms(n, k);
    ms << mx, mat * w, mat * p;
    Eigen::MatrixXd g = s.transpose() * ms;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(g);
    const Eigen::MatrixXd c = rr.eigenvectors().leftCols(b);
    lambda = rr.eigenvalues().head(b);

    p = s.rightCols(k - b) * c.bottomRows(k - b);
    x = s * c;
    // Re-orthonormalise to stop drift, then recompute M x exactly.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
    for (int i = 0; i < b; ++i) {
      if (q.col(i).dot(x.col(i)) < 0.0) q.col(i) = -q.col(i);
    }
    x = q;
    mx = mat * x;
    Eigen::MatrixXd gx = x.transpose() * mx;
    gx = 0.5 * (gx + gx.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rx(gx);
    x = (x * rx.eigenvectors()).eval();
    mx = (mx * rx.eigenvectors()).eval();
    lambda = rx.eigenvalues();
  }
  throw NoConvergence(fmt::format("LOBPCG did not converge in {} iterations (worst relative "
                                  "residual {:.3e})",
                                  options.max_iterations, worst),
                      options.max_iterations, worst);
}

Spectrum smallest_eigs(const SparseSymOperator& op, int m, const EigenOptions& options) {
  if (m < 1) throw InvalidSpec("number of requested eigenpairs must be positive");
  if (m > op.dim()) {
    throw InvalidSpec(fmt::format("requested {} eigenpairs of a {}x{} operator", m, op.dim(),
                                  op.dim()));
  }
  if (op.dim() <= options.dense_threshold) return dense_smallest_eigs(op, m);
  return lobpcg(op, m, options);
}

void polish(const SparseSymOperator& op, Spectrum& s, int count, int sweeps) {
  if (count < 1 || count >= static_cast<int>(s.size())) {
    throw InvalidSpec(fmt::format("polish needs 1 <= count < {}, got {}", s.size(), count));
  }
  const int n = op.dim();
  const double l0 = s.eigenvalues.front();
  const double gap = s.eigenvalues[static_cast<std::size_t>(count)] - l0;
  const double shift = l0 - std::max(1e-3 * gap, 1e-12 * std::max(1.0, std::abs(l0)));

  const CsrMatrix& mat = op.matrix();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mat.nonzeros() + static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    for (std::int64_t q = mat.row_ptr()[r]; q < mat.row_ptr()[r + 1]; ++q) {
      triplets.emplace_back(r, mat.col_idx()[q], mat.values()[q]);
    }
    triplets.emplace_back(r, r, -shift);
  }
  Eigen::SparseMatrix<double> shifted(n, n);
  shifted.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) {
    throw NoConvergence("factorisation for inverse iteration failed", 0, 0.0);
  }

  Eigen::MatrixXd x = s.eigenvectors.leftCols(count);
  Eigen::VectorXd lambda;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    x = ldlt.solve(x).eval();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXd::Identity(n, count);
    Eigen::MatrixXd g = x.transpose() * (mat * x);
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(g);
    x = (x * rr.eigenvectors()).eval();
    lambda = rr.eigenvalues();
  }
  const Eigen::MatrixXd mx = mat * x;
  for (int i = 0; i < count; ++i) {
    s.eigenvectors.col(i) = x.col(i);
    s.eigenvalues[static_cast<std::size_t>(i)] = lambda[i];
    s.residuals[static_cast<std::size_t>(i)] = (mx.col(i) - lambda[i] * x.col(i)).norm();
  }
}

double underflow_threshold(const Eigen::VectorXd& f) {
  return kUnderflowFraction * f.cwiseAbs().maxCoeff();
}

GroundState ground_state(const SparseSymOperator& h, const EigenOptions& options) {
  const int n = h.dim();
  if (n < 1) throw InvalidSpec("ground state of an empty operator");
  EigenOptions opts = options;
  int m = std::min(4, n);
  Spectrum s;
  int cluster = 1;
  for (;;) {
    s = smallest_eigs(h, m, opts);
    const double tol = 1e-6 * std::max(1.0, std::abs(s.eigenvalues.front()));
    cluster = static_cast<int>(std::count_if(
        s.eigenvalues.begin(), s.eigenvalues.end(),
        [&](double v) { return v - s.eigenvalues.front() <= tol; }));
    if (cluster < m || m == n) break;
    opts.initial_guess = s.eigenvectors;
    m = std::min(2 * m, n);
  }
  if (cluster < static_cast<int>(s.size())) polish(h, s, cluster);

  GroundState gs;
  gs.energy = s.eigenvalues.front();
  gs.cluster_size = cluster;
  gs.iterations = s.iterations;
  const Eigen::MatrixXd x = s.eigenvectors.leftCols(cluster);
  const Eigen::VectorXd weights = x.transpose() * Eigen::VectorXd::Ones(n);
  gs.f = weights.norm() > 0.0 ? Eigen::VectorXd(x * weights) : Eigen::VectorXd(x.col(0));
  gs.f.normalize();
  if (gs.f.sum() < 0.0) gs.f = -gs.f;
  gs.min_value = gs.f.minCoeff();
  const double t = underflow_threshold(gs.f);
  gs.underflow_count = static_cast<int>((gs.f.array().abs() <= t).count());
  gs.low = std::move(s);
  if (gs.min_value < -t) {
    throw NonPositiveGroundState(
        fmt::format("ground state is not positive (min f = {:.3e}); the grid is too coarse or "
                    "the solve failed",
                    gs.min_value),
        gs.min_value);
  }
  return gs;
}

Spectrum eigs_below(const SparseSymOperator& op, double threshold, int cap,
                    const EigenOptions& options) {
  if (cap < 1) throw InvalidSpec("eigenvalue cap must be at least 1");
  const int n = op.dim();
  EigenOptions opts = options;
  int request = 4;
  for (;;) {
    request = std::min({request, cap + 1, n});
    Spectrum s = smallest_eigs(op, request, opts);
    const auto below = static_cast<int>(
        std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                      [threshold](double v) { return v < threshold; }));
    if (below < request || request == n) {
      Spectrum out;
      out.eigenvalues.assign(s.eigenvalues.begin(), s.eigenvalues.begin() + below);
      out.eigenvectors = s.eigenvectors.leftCols(below);
      out.residuals.assign(s.residuals.begin(), s.residuals.begin() + below);
      out.iterations = s.iterations;
      out.converged = s.converged;
      return out;
    }
    if (request > cap) {
      throw CapExceeded(fmt::format("more than {} eigenvalues lie below {:.6g}", cap, threshold));
    }
    opts.initial_guess = s.eigenvectors;
    request *= 2;
  }
}

double negative_tolerance(const SparseSymOperator& h_op) { return 1e-10 * h_op.scale(); }

Spectrum negative_eigs(const SparseSymOperator& h_op, int cap, const EigenOptions& options) {
  return eigs_below(h_op, -negative_tolerance(h_op), cap, options);
}

}  // namespace twisttube
