#include "hip/hip_assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace hip::assembly {

namespace {

// Reference vertex coordinates; quads are traversed counterclockwise.
Eigen::Vector2d ref_vertex(mesh::ElementKind kind, int i) {
  if (kind == mesh::ElementKind::triangle) {
    static const Eigen::Vector2d v[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    return v[i];
  }
  static const Eigen::Vector2d v[4] = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  return v[i];
}

struct ElementGeometry {
  Eigen::Vector2d origin;
  Eigen::Matrix2d J;
  Eigen::Matrix2d JinvT;
  double detJ = 0.0;
};

ElementGeometry element_geometry(const mesh::Mesh& m, int e) {
  const auto& el = m.elements[static_cast<size_t>(e)];
  ElementGeometry g;
  g.origin = m.vertex(el.v[0]);
  const Eigen::Vector2d p1 = m.vertex(el.v[1]);
  // Both element maps are affine here: triangles exactly, quads because the
  // mesh only produces axis-aligned parallelograms.
  const Eigen::Vector2d plast = m.vertex(el.v[static_cast<size_t>(el.nv - 1)]);
  g.J.col(0) = p1 - g.origin;
  g.J.col(1) = plast - g.origin;
  g.detJ = g.J.determinant();
  g.JinvT = g.J.inverse().transpose();
  return g;
}

}  // namespace

Scheme Scheme::from_name(const std::string& name) {
  if (name == "sip") return sip();
  if (name == "iip") return iip();
  if (name == "nip") return nip();
  throw std::invalid_argument("assembly::Scheme: unknown scheme '" + name + "'");
}

std::string Scheme::name() const {
  validate();
  return epsilon == 1 ? "sip" : (epsilon == 0 ? "iip" : "nip");
}

void Scheme::validate() const {
  if (epsilon != -1 && epsilon != 0 && epsilon != 1)
    throw std::invalid_argument("assembly::Scheme: epsilon must be -1, 0 or +1");
}

double normal_diffusivity(const Eigen::Matrix2d& K, const Eigen::Vector2d& n) {
  if (std::abs(n.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("assembly::normal_diffusivity: normal must be unit length");
  const double v = n.dot(K * n);
  if (!(v > 0.0))
    throw std::invalid_argument("assembly::normal_diffusivity: K is not positive on n");
  return v;
}

double penalty_value(const PenaltyConfig& pen, int k, double kappa_n, double ell) {
  if (!(pen.alpha0 > 0.0))
    throw std::invalid_argument("assembly::penalty_value: alpha0 must be positive");
  if (!(kappa_n > 0.0) || !(ell > 0.0))
    throw std::invalid_argument("assembly::penalty_value: kappa_n and ell must be positive");
  const double ctr = fem::trace_constant(k, 2);
  return pen.alpha0 * ctr * ctr * kappa_n / std::pow(ell, 1.0 + pen.delta);
}

AssemblyContext::AssemblyContext(const mesh::Mesh& m, int k, int quad_exactness)
    : basis_(m.kind, k),
      trace_(k),
      vol_(fem::quadrature(
          m.kind == mesh::ElementKind::triangle ? fem::Domain::triangle : fem::Domain::quad,
          quad_exactness > 0 ? quad_exactness : 2 * k + 4)),
      face_(fem::quadrature(fem::Domain::segment,
                            quad_exactness > 0 ? quad_exactness : 2 * k + 4)),
      nv_(m.kind == mesh::ElementKind::triangle ? 3 : 4) {
  vol_val_ = basis_.eval(vol_.points);
  std::tie(vol_gx_, vol_gy_) = basis_.eval_grad(vol_.points);
  trace_val_ = trace_.eval(face_.points.col(0));

  face_evals_.resize(static_cast<size_t>(nv_) * nv_);
  for (int la = 0; la < nv_; ++la)
    for (int lb = 0; lb < nv_; ++lb) {
      if (la == lb) continue;
      const Eigen::Vector2d a = ref_vertex(m.kind, la), b = ref_vertex(m.kind, lb);
      Eigen::Matrix<double, Eigen::Dynamic, 2> pts(face_.points.rows(), 2);
      for (Eigen::Index q = 0; q < face_.points.rows(); ++q) {
        const double t = face_.points(q, 0);
        pts.row(q) = ((1.0 - t) * a + t * b).transpose();
      }
      FaceEval fe;
      fe.val = basis_.eval(pts);
      std::tie(fe.gx, fe.gy) = basis_.eval_grad(pts);
      face_evals_[static_cast<size_t>(la * nv_ + lb)] = std::move(fe);
    }
}

const AssemblyContext::FaceEval& AssemblyContext::face_eval(int la, int lb) const {
  if (la < 0 || lb < 0 || la >= nv_ || lb >= nv_ || la == lb)
    throw std::invalid_argument("AssemblyContext::face_eval: bad local vertex pair");
  return face_evals_[static_cast<size_t>(la * nv_ + lb)];
}

LocalSystem assemble_local(const mesh::Mesh& m, int element, const AssemblyContext& ctx,
                           const fem::DofMap& dofmap, const Eigen::Matrix2d& K_E,
                           const Scheme& scheme, const PenaltyConfig& pen,
                           const ScalarField& f) {
  scheme.validate();
  const auto& el = m.elements[static_cast<size_t>(element)];
  const int k = ctx.degree();
  const int nb = ctx.basis().size();
  const int nt = ctx.trace_basis().size();
  const ElementGeometry geo = element_geometry(m, element);
  const double eps = static_cast<double>(scheme.epsilon);

  LocalSystem loc;
  loc.element = element;
  loc.A_EE = Eigen::MatrixXd::Zero(nb, nb);
  loc.f_E = Eigen::VectorXd::Zero(nb);

  // Volume terms: stiffness (K grad u, grad v)_E and the load (f, v)_E.
  const auto& vq = ctx.volume_rule();
  const Eigen::MatrixXd& V = ctx.volume_values();
  const Eigen::MatrixXd& Gx = ctx.volume_grad_x();
  const Eigen::MatrixXd& Gy = ctx.volume_grad_y();
  for (Eigen::Index q = 0; q < vq.weights.size(); ++q) {
    const double w = vq.weights(q) * geo.detJ;
    Eigen::Matrix<double, 2, Eigen::Dynamic> grad(2, nb);
    grad.row(0) = Gx.row(q);
    grad.row(1) = Gy.row(q);
    grad = geo.JinvT * grad;  // physical gradients
    loc.A_EE.noalias() += w * grad.transpose() * (K_E * grad);
    const Eigen::Vector2d x = geo.origin + geo.J * vq.points.row(q).transpose();
    loc.f_E.noalias() += (w * f(x)) * V.row(q).transpose();
  }

  // Count active (interior) faces first so the trace blocks can be sized.
  std::vector<int> active;
  for (int s = 0; s < el.nv; ++s) {
    const int fid = el.faces[static_cast<size_t>(s)];
    if (!m.faces[static_cast<size_t>(fid)].boundary) active.push_back(s);
  }
  const int ncols = static_cast<int>(active.size()) * nt;
  loc.A_EL = Eigen::MatrixXd::Zero(nb, ncols);
  loc.A_LE = Eigen::MatrixXd::Zero(ncols, nb);
  loc.A_LL = Eigen::MatrixXd::Zero(ncols, ncols);
  loc.trace_dofs.reserve(static_cast<size_t>(ncols));

  const auto& fq = ctx.face_rule();
  const Eigen::MatrixXd& M = ctx.trace_values();

  int slot = 0;  // index into the active-face blocks
  for (int s = 0; s < el.nv; ++s) {
    const int fid = el.faces[static_cast<size_t>(s)];
    const auto& face = m.faces[static_cast<size_t>(fid)];
    const Eigen::Vector2d n = m.normal_sign(element, fid) * face.normal;
    const double kappa =
        pen.kappa_mode == KappaMode::unit ? 1.0 : normal_diffusivity(K_E, n);
    const double tau = penalty_value(pen, k, kappa, el.cell_size);

    // The face parametrization runs from the smaller global vertex id, so
    // locate those endpoints in the element's local numbering.
    int la = -1, lb = -1;
    for (int i = 0; i < el.nv; ++i) {
      if (el.v[static_cast<size_t>(i)] == face.v[0]) la = i;
      if (el.v[static_cast<size_t>(i)] == face.v[1]) lb = i;
    }
    const auto& fe = ctx.face_eval(la, lb);

    // Rows of dn_all are the conormal derivatives K grad(phi_j) . n at the
    // face quadrature points.
    const Eigen::Vector2d c = geo.JinvT.transpose() * (K_E.transpose() * n);
    const Eigen::MatrixXd dn_all = c(0) * fe.gx + c(1) * fe.gy;

    const bool has_trace = !face.boundary;
    for (Eigen::Index q = 0; q < fq.weights.size(); ++q) {
      const double w = fq.weights(q) * face.length;
      const Eigen::RowVectorXd phi = fe.val.row(q);
      const Eigen::RowVectorXd dn = dn_all.row(q);

      // Rows are test indices: the consistency term pairs the trial conormal
      // flux with the test value, the epsilon term the reverse.
      loc.A_EE.noalias() += w * (tau * phi.transpose() * phi -
                                 phi.transpose() * dn - eps * dn.transpose() * phi);
      if (has_trace) {
        const Eigen::RowVectorXd mu = M.row(q);
        loc.A_EL.block(0, slot * nt, nb, nt).noalias() +=
            w * (-tau * phi.transpose() * mu + eps * dn.transpose() * mu);
        loc.A_LE.block(slot * nt, 0, nt, nb).noalias() +=
            w * (-tau * mu.transpose() * phi + mu.transpose() * dn);
        loc.A_LL.block(slot * nt, slot * nt, nt, nt).noalias() +=
            (w * tau) * mu.transpose() * mu;
      }
    }
    if (has_trace) {
      const long off = dofmap.face_offset[static_cast<size_t>(fid)];
      for (int a = 0; a < nt; ++a) loc.trace_dofs.push_back(off + a);
      ++slot;
    }
  }
  return loc;
}

CondensedSystem condense(const std::vector<LocalSystem>& locals, const fem::DofMap& dofmap) {
  CondensedSystem sys;
  sys.n_trace = dofmap.n_trace;
  sys.block = dofmap.block;
  sys.backsolve_EL.reserve(locals.size());
  sys.backsolve_f.reserve(locals.size());
  sys.trace_dofs.reserve(locals.size());

  std::vector<linalg::Triplet> trips;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.n_trace);

  for (const auto& loc : locals) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(loc.A_EE);
    Eigen::MatrixXd X = lu.solve(loc.A_EL);          // A_EE^{-1} A_EL
    Eigen::VectorXd y = lu.solve(loc.f_E);           // A_EE^{-1} f_E
    Eigen::MatrixXd S_loc = loc.A_LL - loc.A_LE * X;
    Eigen::VectorXd g_loc = -loc.A_LE * y;

    const auto& td = loc.trace_dofs;
    for (size_t a = 0; a < td.size(); ++a) {
      g(td[a]) += g_loc(static_cast<Eigen::Index>(a));
      for (size_t b = 0; b < td.size(); ++b)
        trips.push_back({td[a], td[b], S_loc(static_cast<Eigen::Index>(a),
                                             static_cast<Eigen::Index>(b))});
    }
    sys.backsolve_EL.push_back(std::move(X));
    sys.backsolve_f.push_back(std::move(y));
    sys.trace_dofs.push_back(td);
  }

  sys.S = linalg::SparseMatrix::from_triplets(sys.n_trace, sys.n_trace, trips);
  sys.g = std::move(g);
  return sys;
}

CompositeField recover(const CondensedSystem& sys, const Eigen::VectorXd& trace_solution) {
  if (trace_solution.size() != sys.n_trace)
    throw std::invalid_argument("assembly::recover: trace vector size mismatch");
  CompositeField out;
  out.trace = trace_solution;
  const long ne = static_cast<long>(sys.backsolve_f.size());
  out.interior.resize(ne * sys.block);
  for (long e = 0; e < ne; ++e) {
    const auto& td = sys.trace_dofs[static_cast<size_t>(e)];
    Eigen::VectorXd lam(static_cast<Eigen::Index>(td.size()));
    for (size_t a = 0; a < td.size(); ++a) lam(static_cast<Eigen::Index>(a)) = trace_solution(td[a]);
    out.interior.segment(e * sys.block, sys.block) =
        sys.backsolve_f[static_cast<size_t>(e)] - sys.backsolve_EL[static_cast<size_t>(e)] * lam;
  }
  return out;
}

namespace {

Eigen::Vector2d element_centroid(const mesh::Mesh& m, int e) {
  const auto& el = m.elements[static_cast<size_t>(e)];
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int i = 0; i < el.nv; ++i) c += m.vertex(el.v[static_cast<size_t>(i)]);
  return c / el.nv;
}

}  // namespace

std::pair<linalg::SparseMatrix, Eigen::VectorXd> assemble_full(
    const mesh::Mesh& m, const AssemblyContext& ctx, const fem::DofMap& dofmap,
    const TensorField& K, const Scheme& scheme, const PenaltyConfig& pen, const ScalarField& f) {
  const long N = dofmap.total();
  std::vector<linalg::Triplet> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);

  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) {
    const LocalSystem loc =
        assemble_local(m, e, ctx, dofmap, K(element_centroid(m, e)), scheme, pen, f);
    const long off = dofmap.elem_offset(e);
    const int nb = dofmap.block;
    for (int i = 0; i < nb; ++i) {
      rhs(off + i) += loc.f_E(i);
      for (int j = 0; j < nb; ++j) trips.push_back({off + i, off + j, loc.A_EE(i, j)});
      for (size_t a = 0; a < loc.trace_dofs.size(); ++a) {
        const long ga = dofmap.n_interior + loc.trace_dofs[a];
        trips.push_back({off + i, ga, loc.A_EL(i, static_cast<Eigen::Index>(a))});
        trips.push_back({ga, off + i, loc.A_LE(static_cast<Eigen::Index>(a), i)});
      }
    }
    for (size_t a = 0; a < loc.trace_dofs.size(); ++a)
      for (size_t b = 0; b < loc.trace_dofs.size(); ++b)
        trips.push_back({dofmap.n_interior + loc.trace_dofs[a],
                         dofmap.n_interior + loc.trace_dofs[b],
                         loc.A_LL(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
  }
  return {linalg::SparseMatrix::from_triplets(N, N, trips), rhs};
}

Certificate coercivity_certificate(const mesh::Mesh& m, int k, const Scheme& scheme,
                                   const PenaltyConfig& pen, const TensorField& K) {
  const AssemblyContext ctx(m, k);
  const fem::DofMap dofmap = fem::build_dofmap(m, k);
  auto [A, rhs] = assemble_full(m, ctx, dofmap, K, scheme, pen,
                                [](const Eigen::Vector2d&) { return 0.0; });

  // Symmetrize: coercivity of the form is definiteness of (A + A^T)/2.
  std::vector<linalg::Triplet> sym;
  const long N = A.rows();
  for (long i = 0; i < N; ++i)
    for (int p = A.row_offsets()[i]; p < A.row_offsets()[i + 1]; ++p) {
      const long j = A.col_indices()[p];
      const double half = 0.5 * A.values()[p];
      sym.push_back({i, j, half});
      sym.push_back({j, i, half});
    }
  const linalg::SparseMatrix S = linalg::SparseMatrix::from_triplets(N, N, sym);

  const linalg::EigenEstimate est = linalg::smallest_eigenvalue(S, 1e-9);
  return {est.value, est.iterations, est.residual};
}

SolveResult solve_hip(const mesh::Mesh& m, const AssemblyContext& ctx, const fem::DofMap& dofmap,
                      const TensorField& K, const Scheme& scheme, const PenaltyConfig& pen,
                      const ScalarField& f, double tol) {
  std::vector<LocalSystem> locals;
  locals.reserve(m.elements.size());
  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e)
    locals.push_back(
        assemble_local(m, e, ctx, dofmap, K(element_centroid(m, e)), scheme, pen, f));

  CondensedSystem sys = condense(locals, dofmap);
  auto [lambda, report] = linalg::solve(sys.S, sys.g, scheme.epsilon == 1, tol);
  SolveResult out;
  out.field = recover(sys, lambda);
  out.report = report;
  out.n_trace = sys.n_trace;
  return out;
}

}  // namespace hip::assembly
