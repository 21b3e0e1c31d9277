#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

// Thin sparse-matrix layer used by the condensed solver: CSR storage,
// direct and conjugate-gradient solves with an explicit residual report, and
// a Lanczos routine for the smallest eigenvalue of a symmetric matrix.

namespace hip::linalg {

struct Triplet {
  long row = 0;
  long col = 0;
  double value = 0.0;
};

class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  SparseMatrix() = default;

  // Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(long rows, long cols, const std::vector<Triplet>& entries);

  long rows() const { return mat_.rows(); }
  long cols() const { return mat_.cols(); }
  long nnz() const { return mat_.nonZeros(); }

  Eigen::VectorXd matvec(const Eigen::VectorXd& x) const;

  // Max absolute row sum.
  double norm_inf() const;

  // CSR views (compressed storage).
  const int* row_offsets() const { return mat_.outerIndexPtr(); }
  const int* col_indices() const { return mat_.innerIndexPtr(); }
  const double* values() const { return mat_.valuePtr(); }

  const Storage& raw() const { return mat_; }

 private:
  explicit SparseMatrix(Storage m) : mat_(std::move(m)) {}
  Storage mat_;
};

struct solver_error : std::runtime_error {
  solver_error(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
  double residual = 0.0;
};

enum class Method { direct, cg };

struct SolveReport {
  Method method = Method::direct;
  int iterations = 0;      // refinement steps (direct) or CG iterations
  double residual = 0.0;   // normwise backward error |Ax-b| / (|A||x| + |b|)
};

// Direct sparse solve with iterative refinement until the normwise backward
// error drops below tol.  With symmetric_hint an LDLT factorization is tried
// first, falling back to LU.  Throws solver_error if the residual target
// cannot be met.
std::pair<Eigen::VectorXd, SolveReport> solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                                              bool symmetric_hint, double tol = 1e-12);

// Jacobi-preconditioned conjugate gradient; valid for symmetric positive
// definite systems.  Throws solver_error on non-convergence.
std::pair<Eigen::VectorXd, SolveReport> solve_cg(const SparseMatrix& A, const Eigen::VectorXd& b,
                                                 double tol = 1e-12, long max_iter = 0);

struct EigenEstimate {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |A v - value v| for the returned Ritz pair
};

// Smallest eigenvalue of a symmetric matrix via Lanczos with full
// reorthogonalization on a spectral shift; deterministic start vector.
EigenEstimate smallest_eigenvalue(const SparseMatrix& A, double tol = 1e-9, int max_iter = 0);

}  // namespace hip::linalg
