#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hip/mesh.hpp"

// Reference-element machinery: Gauss quadrature on the unit segment, the
// unit triangle {x,y >= 0, x+y <= 1} and the unit square, plus L2-orthonormal
// modal bases of degree k <= 6 on each element type and on faces.

namespace hip::fem {

enum class Domain { segment, triangle, quad };

struct QuadratureRule {
  // One row per point; segment rules only use column 0.
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  // Guaranteed polynomial exactness: total degree on the triangle, per-axis
  // degree on the segment and the square.
  int exactness = 0;
};

// Smallest generated rule with at least the requested exactness.  Segment and
// square rules are Gauss-Legendre (tensorized on the square); the triangle
// rule is the conical product of Gauss-Legendre with Gauss-Jacobi(1,0).
QuadratureRule quadrature(Domain dom, int exactness);

// Orthonormal modal basis on the reference element: tensorized shifted
// Legendre polynomials on the square, Dubiner polynomials on the triangle.
class ElementBasis {
 public:
  ElementBasis(mesh::ElementKind kind, int k);

  mesh::ElementKind kind() const { return kind_; }
  int degree() const { return k_; }
  int size() const { return size_; }

  // Values (rows = points, cols = modes) and reference-coordinate gradients.
  Eigen::MatrixXd eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const;
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eval_grad(
      const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const;

 private:
  mesh::ElementKind kind_;
  int k_;
  int size_;
};

// Orthonormal (shifted Legendre) basis on the unit interval, used for the
// trace unknowns on faces.
class TraceBasis {
 public:
  explicit TraceBasis(int k);
  int degree() const { return k_; }
  int size() const { return k_ + 1; }
  Eigen::MatrixXd eval(const Eigen::VectorXd& t) const;

 private:
  int k_;
};

// Discrete trace-inequality constant sqrt((k+1)(k+d)/d) for degree-k
// polynomials in d space dimensions.
double trace_constant(int k, int d = 2);

// Global numbering: interior dofs are blocked per element; trace dofs live
// only on interior faces (homogeneous Dirichlet data is eliminated from the
// skeleton), blocked per face with k+1 modes each.
struct DofMap {
  int k = 0;
  int block = 0;      // interior dofs per element
  long n_interior = 0;
  long n_trace = 0;
  std::vector<long> face_offset;  // offset into the trace block; -1 on boundary faces

  long elem_offset(int e) const { return static_cast<long>(e) * block; }
  long total() const { return n_interior + n_trace; }
};

DofMap build_dofmap(const mesh::Mesh& m, int k);

}  // namespace hip::fem
