#include "hip/fem_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace hip::fem {

namespace {

constexpr int kMaxDegree = 6;
constexpr int kMaxExactness = 60;

// Gauss nodes/weights from the symmetric tridiagonal Jacobi matrix
// (Golub-Welsch).  diag/offdiag are the three-term recurrence coefficients of
// the orthonormal polynomials; mu0 is the total mass of the weight function.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0,
                  Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const int q = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < q; ++i) J(i, i) = diag(i);
  for (int i = 0; i + 1 < q; ++i) {
    J(i, i + 1) = offdiag(i);
    J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes = es.eigenvalues();
  weights.resize(q);
  for (int i = 0; i < q; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
}

// q-point Gauss-Legendre on [0,1], exact for degree 2q-1.
void gauss_legendre01(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd off(q > 1 ? q - 1 : 0);
  for (int j = 1; j < q; ++j) off(j - 1) = j / std::sqrt(4.0 * j * j - 1.0);
  golub_welsch(diag, off, 2.0, nodes, weights);
  nodes = (nodes.array() + 1.0) / 2.0;
  weights /= 2.0;
}

// q-point Gauss-Jacobi with weight (1-x) on [-1,1], exact for degree 2q-1.
void gauss_jacobi10(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd diag(q), off(q > 1 ? q - 1 : 0);
  for (int n = 0; n < q; ++n) diag(n) = -1.0 / ((2.0 * n + 1.0) * (2.0 * n + 3.0));
  for (int n = 1; n < q; ++n) off(n - 1) = std::sqrt(n * (n + 1.0)) / (2.0 * n + 1.0);
  golub_welsch(diag, off, 2.0, nodes, weights);
}

// Orthonormal Jacobi polynomials P_n^{(alpha,beta)} on [-1,1] for all the
// points in x at once; returns the degree-n values.
Eigen::VectorXd jacobi_p(const Eigen::VectorXd& x, double alpha, double beta, int n) {
  const double gamma0 = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                        std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                        std::tgamma(alpha + beta + 1.0);
  Eigen::VectorXd pm1 = Eigen::VectorXd::Constant(x.size(), 1.0 / std::sqrt(gamma0));
  if (n == 0) return pm1;
  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
  Eigen::VectorXd p =
      ((alpha + beta + 2.0) / 2.0 * x.array() + (alpha - beta) / 2.0).matrix() /
      std::sqrt(gamma1);
  if (n == 1) return p;
  double aold = 2.0 / (2.0 + alpha + beta) *
                std::sqrt((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    const double anew = 2.0 / (h1 + 2.0) *
                        std::sqrt((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) *
                                  (i + 1.0 + beta) / (h1 + 1.0) / (h1 + 3.0));
    const double bnew = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    Eigen::VectorXd pnew =
        (((x.array() - bnew) * p.array()).matrix() - aold * pm1) / anew;
    pm1 = p;
    p = pnew;
    aold = anew;
  }
  return p;
}

Eigen::VectorXd grad_jacobi_p(const Eigen::VectorXd& x, double alpha, double beta, int n) {
  if (n == 0) return Eigen::VectorXd::Zero(x.size());
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

// Shifted Legendre values/derivatives on [0,1], orthonormal: column i holds
// sqrt(2i+1) P_i(2t-1).
void legendre01_all(const Eigen::VectorXd& t, int k, Eigen::MatrixXd& val, Eigen::MatrixXd& der) {
  const auto np = t.size();
  val.resize(np, k + 1);
  der.resize(np, k + 1);
  Eigen::ArrayXd x = 2.0 * t.array() - 1.0;
  Eigen::ArrayXd pm1 = Eigen::ArrayXd::Ones(np), p = x;
  Eigen::ArrayXd dm1 = Eigen::ArrayXd::Zero(np), d = Eigen::ArrayXd::Ones(np);
  for (int i = 0; i <= k; ++i) {
    const double c = std::sqrt(2.0 * i + 1.0);
    if (i == 0) {
      val.col(0) = c * pm1;
      der.col(0).setZero();
      continue;
    }
    val.col(i) = c * p;
    der.col(i) = 2.0 * c * d;  // chain rule for t -> 2t-1
    if (i < k) {
      Eigen::ArrayXd pn = ((2.0 * i + 1.0) * x * p - i * pm1) / (i + 1.0);
      Eigen::ArrayXd dn = ((2.0 * i + 1.0) * (p + x * d) - i * dm1) / (i + 1.0);
      pm1 = p;
      p = pn;
      dm1 = d;
      d = dn;
    }
  }
}

int triangle_dim(int k) { return (k + 1) * (k + 2) / 2; }

void check_degree(int k) {
  if (k < 1 || k > kMaxDegree) throw std::invalid_argument("fem: degree k must be in [1,6]");
}

}  // namespace

QuadratureRule quadrature(Domain dom, int exactness) {
  if (exactness < 0 || exactness > kMaxExactness)
    throw std::invalid_argument("fem::quadrature: exactness must be in [0,60]");
  const int q = exactness / 2 + 1;  // 2q-1 >= exactness
  QuadratureRule rule;
  rule.exactness = 2 * q - 1;

  Eigen::VectorXd gl, wl;
  gauss_legendre01(q, gl, wl);

  switch (dom) {
    case Domain::segment:
      rule.points.resize(q, 2);
      rule.points.col(0) = gl;
      rule.points.col(1).setZero();
      rule.weights = wl;
      break;
    case Domain::quad:
      rule.points.resize(q * q, 2);
      rule.weights.resize(q * q);
      for (int j = 0; j < q; ++j)
        for (int i = 0; i < q; ++i) {
          rule.points(j * q + i, 0) = gl(i);
          rule.points(j * q + i, 1) = gl(j);
          rule.weights(j * q + i) = wl(i) * wl(j);
        }
      break;
    case Domain::triangle: {
      // Duffy split: (u,v) in [0,1]^2 -> (u(1-v), v) with Jacobian (1-v),
      // which the Jacobi(1,0) rule absorbs exactly.
      Eigen::VectorXd gj, wj;
      gauss_jacobi10(q, gj, wj);
      rule.points.resize(q * q, 2);
      rule.weights.resize(q * q);
      for (int j = 0; j < q; ++j) {
        const double v = (gj(j) + 1.0) / 2.0;
        const double w = wj(j) / 4.0;
        for (int i = 0; i < q; ++i) {
          rule.points(j * q + i, 0) = gl(i) * (1.0 - v);
          rule.points(j * q + i, 1) = v;
          rule.weights(j * q + i) = wl(i) * w;
        }
      }
      break;
    }
  }
  return rule;
}

ElementBasis::ElementBasis(mesh::ElementKind kind, int k) : kind_(kind), k_(k) {
  check_degree(k);
  size_ = (kind == mesh::ElementKind::triangle) ? triangle_dim(k) : (k + 1) * (k + 1);
}

Eigen::MatrixXd ElementBasis::eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const {
  const auto np = pts.rows();
  Eigen::MatrixXd out(np, size_);
  if (kind_ == mesh::ElementKind::quad) {
    Eigen::MatrixXd lx, dx, ly, dy;
    legendre01_all(pts.col(0), k_, lx, dx);
    legendre01_all(pts.col(1), k_, ly, dy);
    for (int j = 0; j <= k_; ++j)
      for (int i = 0; i <= k_; ++i)
        out.col(j * (k_ + 1) + i) = lx.col(i).array() * ly.col(j).array();
    return out;
  }

  // Dubiner basis through the collapsed-coordinate map; (a,b) live on the
  // biunit square, with the a -> -1 limit at the top vertex.
  Eigen::VectorXd a(np), b(np);
  for (Eigen::Index p = 0; p < np; ++p) {
    const double r = 2.0 * pts(p, 0) - 1.0, s = 2.0 * pts(p, 1) - 1.0;
    a(p) = (std::abs(s - 1.0) > 1e-14) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
    b(p) = s;
  }
  int m = 0;
  for (int i = 0; i <= k_; ++i) {
    const Eigen::VectorXd fa = jacobi_p(a, 0.0, 0.0, i);
    Eigen::ArrayXd pow_b = Eigen::pow((1.0 - b.array()), i);
    for (int j = 0; j <= k_ - i; ++j) {
      const Eigen::VectorXd gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      // Factor 2 rescales the biunit-orthonormal mode to the unit triangle.
      out.col(m++) = 2.0 * std::sqrt(2.0) * fa.array() * gb.array() * pow_b;
    }
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> ElementBasis::eval_grad(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const {
  const auto np = pts.rows();
  Eigen::MatrixXd gx(np, size_), gy(np, size_);
  if (kind_ == mesh::ElementKind::quad) {
    Eigen::MatrixXd lx, dx, ly, dy;
    legendre01_all(pts.col(0), k_, lx, dx);
    legendre01_all(pts.col(1), k_, ly, dy);
    for (int j = 0; j <= k_; ++j)
      for (int i = 0; i <= k_; ++i) {
        gx.col(j * (k_ + 1) + i) = dx.col(i).array() * ly.col(j).array();
        gy.col(j * (k_ + 1) + i) = lx.col(i).array() * dy.col(j).array();
      }
    return {gx, gy};
  }

  Eigen::VectorXd a(np), b(np);
  for (Eigen::Index p = 0; p < np; ++p) {
    const double r = 2.0 * pts(p, 0) - 1.0, s = 2.0 * pts(p, 1) - 1.0;
    a(p) = (std::abs(s - 1.0) > 1e-14) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
    b(p) = s;
  }
  Eigen::ArrayXd half_1mb = 0.5 * (1.0 - b.array());
  int m = 0;
  for (int i = 0; i <= k_; ++i) {
    const Eigen::ArrayXd fa = jacobi_p(a, 0.0, 0.0, i);
    const Eigen::ArrayXd dfa = grad_jacobi_p(a, 0.0, 0.0, i);
    Eigen::ArrayXd pow_im1 = Eigen::ArrayXd::Zero(np);
    if (i > 0) pow_im1 = Eigen::pow(half_1mb, i - 1);
    Eigen::ArrayXd pow_i = Eigen::pow(half_1mb, i);
    for (int j = 0; j <= k_ - i; ++j) {
      const Eigen::ArrayXd gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      const Eigen::ArrayXd dgb = grad_jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      Eigen::ArrayXd dr = dfa * gb;
      if (i > 0) dr *= pow_im1;
      Eigen::ArrayXd ds = dfa * gb * 0.5 * (1.0 + a.array());
      if (i > 0) ds *= pow_im1;
      Eigen::ArrayXd tmp = dgb * pow_i;
      if (i > 0) tmp -= 0.5 * i * gb * pow_im1;
      ds += fa * tmp;
      // 2^{i+1/2} restores the collapsed-coordinate normalization, one factor
      // 2 rescales biunit -> unit triangle, another is the chain rule of the
      // map itself.
      const double c = std::pow(2.0, i + 0.5) * 4.0;
      gx.col(m) = c * dr;
      gy.col(m) = c * ds;
      ++m;
    }
  }
  return {gx, gy};
}

TraceBasis::TraceBasis(int k) : k_(k) { check_degree(k); }

Eigen::MatrixXd TraceBasis::eval(const Eigen::VectorXd& t) const {
  Eigen::MatrixXd val, der;
  legendre01_all(t, k_, val, der);
  return val;
}

double trace_constant(int k, int d) {
  if (k < 0) throw std::invalid_argument("fem::trace_constant: k must be >= 0");
  if (d < 1 || d > 3) throw std::invalid_argument("fem::trace_constant: d must be in {1,2,3}");
  return std::sqrt((k + 1.0) * (k + d) / d);
}

DofMap build_dofmap(const mesh::Mesh& m, int k) {
  check_degree(k);
  DofMap dm;
  dm.k = k;
  ElementBasis basis(m.kind, k);
  dm.block = basis.size();
  dm.n_interior = static_cast<long>(m.elements.size()) * dm.block;
  dm.face_offset.assign(m.faces.size(), -1);
  long off = 0;
  for (size_t f = 0; f < m.faces.size(); ++f) {
    if (m.faces[f].boundary) continue;
    dm.face_offset[f] = off;
    off += k + 1;
  }
  dm.n_trace = off;
  return dm;
}

}  // namespace hip::fem
