#include "hip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace hip::linalg {

namespace {

// Normwise backward error |b - Ax| / (|A| |x| + |b|).  The naive |r| / |b|
// is unbounded for penalty-dominated systems (|A| |x| >> |b|) no matter how
// good the factorization, so it cannot serve as a convergence target.
double backward_error(const SparseMatrix& A, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& b) {
  const double nr = (A.matvec(x) - b).norm();
  const double denom = A.norm_inf() * x.norm() + b.norm();
  return denom > 0.0 ? nr / denom : nr;
}

// Deterministic pseudo-random unit vector (raw mt19937 draws; distribution
// classes are implementation-defined and would break reproducibility).
Eigen::VectorXd seeded_unit_vector(long n, unsigned seed) {
  std::mt19937 rng(seed);
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i)
    v(i) = static_cast<double>(rng()) / 4294967296.0 - 0.5;
  v.normalize();
  return v;
}

}  // namespace

SparseMatrix SparseMatrix::from_triplets(long rows, long cols,
                                         const std::vector<Triplet>& entries) {
  if (rows < 0 || cols < 0)
    throw std::invalid_argument("linalg::from_triplets: negative dimensions");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw std::invalid_argument("linalg::from_triplets: entry out of range");
    t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  }
  Storage m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return SparseMatrix(std::move(m));
}

Eigen::VectorXd SparseMatrix::matvec(const Eigen::VectorXd& x) const {
  if (x.size() != mat_.cols())
    throw std::invalid_argument("linalg::matvec: dimension mismatch");
  return mat_ * x;
}

double SparseMatrix::norm_inf() const {
  double mx = 0.0;
  for (long i = 0; i < rows(); ++i) {
    double s = 0.0;
    for (int p = row_offsets()[i]; p < row_offsets()[i + 1]; ++p)
      s += std::abs(values()[p]);
    mx = std::max(mx, s);
  }
  return mx;
}

std::pair<Eigen::VectorXd, SolveReport> solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                                              bool symmetric_hint, double tol) {
  if (A.rows() != A.cols()) throw std::invalid_argument("linalg::solve: matrix must be square");
  if (b.size() != A.rows()) throw std::invalid_argument("linalg::solve: rhs size mismatch");

  const Eigen::SparseMatrix<double> Ac = A.raw();  // factorizations want column-major

  auto refine = [&](auto& factorization) -> std::pair<bool, std::pair<Eigen::VectorXd, int>> {
    Eigen::VectorXd x = factorization.solve(b);
    if (factorization.info() != Eigen::Success) return {false, {x, 0}};
    int steps = 0;
    for (; steps < 4; ++steps) {
      if (backward_error(A, x, b) <= tol) break;
      const Eigen::VectorXd r = b - A.matvec(x);
      x += factorization.solve(r);
    }
    return {true, {x, steps}};
  };

  if (symmetric_hint) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Ac);
    if (ldlt.info() == Eigen::Success) {
      auto [ok, sol] = refine(ldlt);
      if (ok && backward_error(A, sol.first, b) <= tol)
        return {sol.first, {Method::direct, sol.second, backward_error(A, sol.first, b)}};
    }
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(Ac);
  lu.factorize(Ac);
  if (lu.info() != Eigen::Success)
    throw solver_error("linalg::solve: factorization failed", std::nan(""));
  auto [ok, sol] = refine(lu);
  const double res = backward_error(A, sol.first, b);
  if (!ok || !(res <= tol))  // written so a NaN residual also fails
    throw solver_error("linalg::solve: residual target not met", res);
  return {sol.first, {Method::direct, sol.second, res}};
}

std::pair<Eigen::VectorXd, SolveReport> solve_cg(const SparseMatrix& A, const Eigen::VectorXd& b,
                                                 double tol, long max_iter) {
  if (A.rows() != A.cols()) throw std::invalid_argument("linalg::solve_cg: matrix must be square");
  if (b.size() != A.rows()) throw std::invalid_argument("linalg::solve_cg: rhs size mismatch");

  Eigen::ConjugateGradient<SparseMatrix::Storage, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  if (max_iter <= 0) max_iter = 4 * A.rows() + 100;
  cg.setMaxIterations(max_iter);
  cg.compute(A.raw());
  Eigen::VectorXd x = cg.solve(b);
  const double res = backward_error(A, x, b);
  if (cg.info() != Eigen::Success && !(res <= tol))
    throw solver_error("linalg::solve_cg: no convergence in " + std::to_string(max_iter) +
                           " iterations",
                       res);
  return {x, {Method::cg, static_cast<int>(cg.iterations()), res}};
}

EigenEstimate smallest_eigenvalue(const SparseMatrix& A, double tol, int max_iter) {
  const long n = A.rows();
  if (n != A.cols()) throw std::invalid_argument("linalg::smallest_eigenvalue: matrix not square");
  if (n == 0) throw std::invalid_argument("linalg::smallest_eigenvalue: empty matrix");

  // Gershgorin upper bound sigma; Lanczos then targets the largest eigenvalue
  // of sigma*I - A, which maps back to the smallest of A.
  double sigma = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < n; ++i) {
    double diag = 0.0, off = 0.0;
    for (int p = A.row_offsets()[i]; p < A.row_offsets()[i + 1]; ++p) {
      if (A.col_indices()[p] == i)
        diag = A.values()[p];
      else
        off += std::abs(A.values()[p]);
    }
    sigma = std::max(sigma, diag + off);
  }
  sigma += 1.0;  // keep the shifted operator strictly positive definite

  if (max_iter <= 0) max_iter = static_cast<int>(std::min<long>(n, 500));
  // Explicit return type: the subtraction must be materialized before the
  // matvec temporary it references goes out of scope.
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return sigma * v - A.matvec(v);
  };

  Eigen::MatrixXd V(n, max_iter + 1);
  Eigen::VectorXd alpha(max_iter), beta(max_iter);
  V.col(0) = seeded_unit_vector(n, 20240811u);

  int m = 0;
  double ritz = 0.0, resid = std::numeric_limits<double>::infinity();
  Eigen::VectorXd ritz_weights;
  for (int j = 0; j < max_iter; ++j) {
    Eigen::VectorXd w = op(V.col(j));
    alpha(j) = V.col(j).dot(w);
    w -= alpha(j) * V.col(j);
    if (j > 0) w -= beta(j - 1) * V.col(j - 1);
    // Full reorthogonalization keeps the basis usable well past the point
    // where plain Lanczos loses orthogonality.
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    beta(j) = w.norm();
    m = j + 1;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = alpha(i);
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const int top = m - 1;  // eigenvalues ascend; the largest maps to lambda_min(A)
    ritz = es.eigenvalues()(top);
    resid = beta(j) * std::abs(es.eigenvectors()(m - 1, top));
    ritz_weights = es.eigenvectors().col(top);

    if (resid <= tol * std::max(1.0, std::abs(ritz))) break;
    if (beta(j) < 1e-13 || m == n) break;  // invariant subspace exhausted
    V.col(j + 1) = w / beta(j);
  }

  if (resid > tol * std::max(1.0, std::abs(ritz)) && beta(m - 1) >= 1e-13 && m < n)
    throw solver_error("linalg::smallest_eigenvalue: Lanczos did not converge", resid);

  return {sigma - ritz, m, resid};
}

}  // namespace hip::linalg
