#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hip/fem_basis.hpp"
#include "hip/linalg.hpp"
#include "hip/mesh.hpp"

// Hybridized interior-penalty assembly for the anisotropic Poisson problem
//   -div(K grad u) = f  on the unit square,  u = 0 on the boundary.
// Element unknowns are discontinuous degree-k polynomials; an independent
// degree-k trace unknown lives on every interior face.  The element blocks
// are condensed onto the traces, solved, and the interiors recovered.
//
// The one-sided form on element E with outward normal n, face penalty tau and
// symmetry switch epsilon in {+1, 0, -1} reads
//   (K grad u, grad v)_E + sum_F [ tau (u - uhat)(v - vhat)
//                                  - (K grad u . n)(v - vhat)
//                                  - epsilon (K grad v . n)(u - uhat) ]_F.

namespace hip::assembly {

struct Scheme {
  int epsilon = 1;

  static Scheme sip() { return {+1}; }
  static Scheme iip() { return {0}; }
  static Scheme nip() { return {-1}; }
  static Scheme from_name(const std::string& name);
  std::string name() const;
  void validate() const;
};

enum class KappaMode { unit, normal };

struct PenaltyConfig {
  double alpha0 = 1.0;
  double delta = 0.0;
  KappaMode kappa_mode = KappaMode::normal;
};

// n^T K n for a unit normal n.
double normal_diffusivity(const Eigen::Matrix2d& K, const Eigen::Vector2d& n);

// tau = alpha0 * C_tr(k)^2 * kappa_n / ell^(1+delta) with ell the element's
// area-based length scale.
double penalty_value(const PenaltyConfig& pen, int k, double kappa_n, double ell);

using ScalarField = std::function<double(const Eigen::Vector2d&)>;
using TensorField = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;

// Reference-element evaluations shared by every element of a mesh: basis
// values/gradients at the volume rule and at the face rule traced along each
// oriented reference edge.  Building these once keeps assembly O(1) basis
// evaluations per element.
class AssemblyContext {
 public:
  // quad_exactness <= 0 selects the default 2k+4.
  AssemblyContext(const mesh::Mesh& m, int k, int quad_exactness = 0);

  const fem::ElementBasis& basis() const { return basis_; }
  const fem::TraceBasis& trace_basis() const { return trace_; }
  const fem::QuadratureRule& volume_rule() const { return vol_; }
  const fem::QuadratureRule& face_rule() const { return face_; }

  const Eigen::MatrixXd& volume_values() const { return vol_val_; }
  const Eigen::MatrixXd& volume_grad_x() const { return vol_gx_; }
  const Eigen::MatrixXd& volume_grad_y() const { return vol_gy_; }
  const Eigen::MatrixXd& trace_values() const { return trace_val_; }

  struct FaceEval {
    Eigen::MatrixXd val, gx, gy;  // basis traces at the face rule points
  };
  // Evaluations along the reference edge running from local vertex la to lb.
  const FaceEval& face_eval(int la, int lb) const;

  int degree() const { return basis_.degree(); }

 private:
  fem::ElementBasis basis_;
  fem::TraceBasis trace_;
  fem::QuadratureRule vol_, face_;
  Eigen::MatrixXd vol_val_, vol_gx_, vol_gy_, trace_val_;
  std::vector<FaceEval> face_evals_;  // indexed la * nv + lb
  int nv_;
};

struct LocalSystem {
  int element = -1;
  // Blocks ordered [interior | traces of the active (interior) faces].
  Eigen::MatrixXd A_EE, A_EL, A_LE, A_LL;
  Eigen::VectorXd f_E;
  std::vector<long> trace_dofs;  // global trace indices for the A_*L columns
};

LocalSystem assemble_local(const mesh::Mesh& m, int element, const AssemblyContext& ctx,
                           const fem::DofMap& dofmap, const Eigen::Matrix2d& K_E,
                           const Scheme& scheme, const PenaltyConfig& pen,
                           const ScalarField& f);

struct CondensedSystem {
  linalg::SparseMatrix S;  // trace Schur complement
  Eigen::VectorXd g;
  long n_trace = 0;
  int block = 0;
  // Per-element recovery data: u_E = backsolve_f[e] - backsolve_EL[e] * lambda_E.
  std::vector<Eigen::MatrixXd> backsolve_EL;
  std::vector<Eigen::VectorXd> backsolve_f;
  std::vector<std::vector<long>> trace_dofs;
};

CondensedSystem condense(const std::vector<LocalSystem>& locals, const fem::DofMap& dofmap);

struct CompositeField {
  Eigen::VectorXd interior;  // element-blocked coefficients
  Eigen::VectorXd trace;     // face-blocked trace coefficients
};

CompositeField recover(const CondensedSystem& sys, const Eigen::VectorXd& trace_solution);

// Uncondensed system over [interior; trace] unknowns; K is sampled at element
// centroids.  Used by the coercivity certificate and as a cross-check.
std::pair<linalg::SparseMatrix, Eigen::VectorXd> assemble_full(const mesh::Mesh& m,
                                                               const AssemblyContext& ctx,
                                                               const fem::DofMap& dofmap,
                                                               const TensorField& K,
                                                               const Scheme& scheme,
                                                               const PenaltyConfig& pen,
                                                               const ScalarField& f);

struct Certificate {
  double lambda_min = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

// Smallest eigenvalue of the symmetrized full system; a negative value
// certifies loss of coercivity for the given scheme/penalty on this mesh.
Certificate coercivity_certificate(const mesh::Mesh& m, int k, const Scheme& scheme,
                                   const PenaltyConfig& pen, const TensorField& K);

// Convenience driver: assemble, condense, solve for the traces, recover.
struct SolveResult {
  CompositeField field;
  linalg::SolveReport report;
  long n_trace = 0;
};

SolveResult solve_hip(const mesh::Mesh& m, const AssemblyContext& ctx, const fem::DofMap& dofmap,
                      const TensorField& K, const Scheme& scheme, const PenaltyConfig& pen,
                      const ScalarField& f, double tol = 1e-12);

}  // namespace hip::assembly
