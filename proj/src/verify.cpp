#include "hip/verify.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hip::verify {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bump(double t) { return t * (1.0 - t) * std::exp(-t * t); }
double bump1(double t) {
  return std::exp(-t * t) * (1.0 - 2.0 * t - 2.0 * t * t + 2.0 * t * t * t);
}
double bump2(double t) {
  const double t2 = t * t;
  return std::exp(-t2) * (-2.0 - 6.0 * t + 10.0 * t2 + 4.0 * t2 * t - 4.0 * t2 * t2);
}

Eigen::Matrix2d quadrant_tensor(const Eigen::Vector2d& x, double lambda) {
  // Lower-left and upper-right quadrants carry diag(1, lambda), the other two
  // diag(1/lambda, 1); the exact solution has continuous conormal flux across
  // the interfaces.
  const bool left = x.x() < 0.5, lower = x.y() < 0.5;
  Eigen::Matrix2d K = Eigen::Matrix2d::Zero();
  if (left == lower) {
    K(0, 0) = 1.0;
    K(1, 1) = lambda;
  } else {
    K(0, 0) = 1.0 / lambda;
    K(1, 1) = 1.0;
  }
  return K;
}

struct ElementGeometry {
  Eigen::Vector2d origin;
  Eigen::Matrix2d J, JinvT;
  double detJ;
};

ElementGeometry geometry(const mesh::Mesh& m, int e) {
  const auto& el = m.elements[static_cast<size_t>(e)];
  ElementGeometry g;
  g.origin = m.vertex(el.v[0]);
  g.J.col(0) = m.vertex(el.v[1]) - g.origin;
  g.J.col(1) = m.vertex(el.v[static_cast<size_t>(el.nv - 1)]) - g.origin;
  g.detJ = g.J.determinant();
  g.JinvT = g.J.inverse().transpose();
  return g;
}

Eigen::Matrix2d sqrt_spd(const Eigen::Matrix2d& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(K);
  return es.operatorSqrt();
}

double l2_error_with_rule(const mesh::Mesh& m, const fem::DofMap& dofmap,
                          const assembly::CompositeField& field, const Problem& prob,
                          const fem::QuadratureRule& rule, const Eigen::MatrixXd& values) {
  double acc = 0.0;
  const int nb = dofmap.block;
  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) {
    const ElementGeometry g = geometry(m, e);
    const auto coef = field.interior.segment(dofmap.elem_offset(e), nb);
    const Eigen::VectorXd uh = values * coef;
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
      const Eigen::Vector2d x = g.origin + g.J * rule.points.row(q).transpose();
      const double diff = prob.u(x) - uh(q);
      acc += rule.weights(q) * g.detJ * diff * diff;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

Problem make_problem(const std::string& test, double lambda) {
  if (test == "a") {
    Problem p;
    p.name = "a";
    p.lambda = lambda;
    p.K = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity().eval(); };
    p.u = [](const Eigen::Vector2d& x) { return bump(x.x()) * bump(x.y()); };
    p.grad_u = [](const Eigen::Vector2d& x) {
      return Eigen::Vector2d(bump1(x.x()) * bump(x.y()), bump(x.x()) * bump1(x.y()));
    };
    p.f = [](const Eigen::Vector2d& x) {
      return -(bump2(x.x()) * bump(x.y()) + bump(x.x()) * bump2(x.y()));
    };
    return p;
  }
  if (test == "b" || test == "c") {
    if (!(lambda > 0.0))
      throw std::invalid_argument("verify::make_problem: lambda must be positive");
    Problem p;
    p.name = test;
    p.lambda = lambda;
    p.K = [lambda](const Eigen::Vector2d& x) { return quadrant_tensor(x, lambda); };
    p.u = [](const Eigen::Vector2d& x) {
      return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    p.grad_u = [](const Eigen::Vector2d& x) {
      return Eigen::Vector2d(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                             kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
    p.f = [lambda](const Eigen::Vector2d& x) {
      const Eigen::Matrix2d K = quadrant_tensor(x, lambda);
      return (K(0, 0) + K(1, 1)) * kPi * kPi * std::sin(kPi * x.x()) *
             std::sin(kPi * x.y());
    };
    return p;
  }
  throw std::invalid_argument("verify::make_problem: unknown test '" + test + "'");
}

double l2_error(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                const fem::DofMap& dofmap, const assembly::CompositeField& field,
                const Problem& prob) {
  return l2_error_with_rule(m, dofmap, field, prob, ctx.volume_rule(), ctx.volume_values());
}

double l2_error_discrete(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                         const fem::DofMap& dofmap, const assembly::CompositeField& field,
                         const Problem& prob) {
  const int k = ctx.degree();
  const fem::QuadratureRule rule = fem::quadrature(
      m.kind == mesh::ElementKind::triangle ? fem::Domain::triangle : fem::Domain::quad,
      2 * k + 1);
  const Eigen::MatrixXd values = ctx.basis().eval(rule.points);
  return l2_error_with_rule(m, dofmap, field, prob, rule, values);
}

namespace {

// Shared face walk for the jump and boundary-flux terms of the two mesh
// norms.  with_flux adds h_E * |K^(1/2) grad(u - u_h)|^2 on every face.
double error_norm(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                  const fem::DofMap& dofmap, const assembly::CompositeField& field,
                  const Problem& prob, const assembly::PenaltyConfig& pen, bool with_flux) {
  const int k = ctx.degree();
  const int nb = dofmap.block;
  const int nt = k + 1;
  double acc = 0.0;

  const auto& vq = ctx.volume_rule();
  const auto& fq = ctx.face_rule();
  const Eigen::MatrixXd& Gx = ctx.volume_grad_x();
  const Eigen::MatrixXd& Gy = ctx.volume_grad_y();
  const Eigen::MatrixXd& M = ctx.trace_values();

  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) {
    const auto& el = m.elements[static_cast<size_t>(e)];
    const ElementGeometry g = geometry(m, e);
    const auto coef = field.interior.segment(dofmap.elem_offset(e), nb);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (int i = 0; i < el.nv; ++i) centroid += m.vertex(el.v[static_cast<size_t>(i)]);
    centroid /= el.nv;
    const Eigen::Matrix2d K_E = prob.K(centroid);
    const Eigen::Matrix2d Khalf = sqrt_spd(K_E);

    // Broken K-weighted gradient seminorm.
    for (Eigen::Index q = 0; q < vq.weights.size(); ++q) {
      const Eigen::Vector2d x = g.origin + g.J * vq.points.row(q).transpose();
      Eigen::Vector2d grad_h(Gx.row(q).dot(coef), Gy.row(q).dot(coef));
      grad_h = g.JinvT * grad_h;
      const Eigen::Vector2d d = Khalf * (prob.grad_u(x) - grad_h);
      acc += vq.weights(q) * g.detJ * d.squaredNorm();
    }

    for (int s = 0; s < el.nv; ++s) {
      const int fid = el.faces[static_cast<size_t>(s)];
      const auto& face = m.faces[static_cast<size_t>(fid)];
      const Eigen::Vector2d n = m.normal_sign(e, fid) * face.normal;
      const double kappa =
          pen.kappa_mode == assembly::KappaMode::unit ? 1.0 : assembly::normal_diffusivity(K_E, n);
      const double tau = assembly::penalty_value(pen, k, kappa, el.cell_size);

      int la = -1, lb = -1;
      for (int i = 0; i < el.nv; ++i) {
        if (el.v[static_cast<size_t>(i)] == face.v[0]) la = i;
        if (el.v[static_cast<size_t>(i)] == face.v[1]) lb = i;
      }
      const auto& fe = ctx.face_eval(la, lb);
      const long off = dofmap.face_offset[static_cast<size_t>(fid)];

      for (Eigen::Index q = 0; q < fq.weights.size(); ++q) {
        const double w = fq.weights(q) * face.length;
        const double t = fq.points(q, 0);
        const Eigen::Vector2d x =
            (1.0 - t) * m.vertex(face.v[0]) + t * m.vertex(face.v[1]);
        const double uh = fe.val.row(q).dot(coef);
        // Composite error jump on the face: exact traces cancel, leaving
        // lambda_h - u_h on interior faces and u - u_h on the boundary
        // (where the trace space is pinned to the datum).
        double jump;
        if (face.boundary) {
          jump = prob.u(x) - uh;
        } else {
          const double lam = M.row(q).dot(field.trace.segment(off, nt));
          jump = lam - uh;
        }
        acc += w * tau * jump * jump;

        if (with_flux) {
          Eigen::Vector2d grad_h(fe.gx.row(q).dot(coef), fe.gy.row(q).dot(coef));
          grad_h = g.JinvT * grad_h;
          const Eigen::Vector2d d = Khalf * (prob.grad_u(x) - grad_h);
          acc += el.diameter * w * d.squaredNorm();
        }
      }
    }
  }
  return std::sqrt(acc);
}

}  // namespace

double energy_error(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                    const fem::DofMap& dofmap, const assembly::CompositeField& field,
                    const Problem& prob, const assembly::PenaltyConfig& pen) {
  return error_norm(m, ctx, dofmap, field, prob, pen, false);
}

double enriched_error(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                      const fem::DofMap& dofmap, const assembly::CompositeField& field,
                      const Problem& prob, const assembly::PenaltyConfig& pen) {
  return error_norm(m, ctx, dofmap, field, prob, pen, true);
}

double min_sample(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                  const fem::DofMap& dofmap, const assembly::CompositeField& field) {
  double mn = std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd& V = ctx.volume_values();
  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) {
    const Eigen::VectorXd uh =
        V * field.interior.segment(dofmap.elem_offset(e), dofmap.block);
    mn = std::min(mn, uh.minCoeff());
  }
  return mn;
}

ExpectedRates expected_rates(int epsilon, double delta, int k, double s) {
  if (epsilon != -1 && epsilon != 0 && epsilon != 1)
    throw std::invalid_argument("verify::expected_rates: epsilon must be -1, 0 or +1");
  if (k < 1) throw std::invalid_argument("verify::expected_rates: k must be >= 1");
  ExpectedRates r;
  r.mu = std::min(static_cast<double>(k + 1), s);
  r.r_delta = std::min(0.0, delta);
  if (epsilon == 1)
    r.s_delta = std::min(0.0, 2.0 * delta);
  else if (delta >= 0.0)
    r.s_delta = std::min(0.0, delta / 2.0 - 1.0);
  else
    r.s_delta = std::min(2.0 * delta, 1.5 * delta - 1.0);
  r.energy = r.mu + r.r_delta - 1.0;
  r.l2 = r.mu + r.s_delta;
  return r;
}

std::vector<double> ecr(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size())
    throw std::invalid_argument("verify::ecr: errors and hs must have equal length");
  if (errors.size() < 2) return {};
  std::vector<double> out;
  out.reserve(errors.size() - 1);
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(hs[i] > 0.0) || !(hs[i + 1] > 0.0) || hs[i] == hs[i + 1])
      throw std::invalid_argument("verify::ecr: mesh sizes must be positive and distinct");
    if (errors[i] < 0.0 || errors[i + 1] < 0.0)
      throw std::invalid_argument("verify::ecr: errors must be nonnegative");
    if (errors[i + 1] == 0.0) {
      out.push_back(std::numeric_limits<double>::infinity());  // saturated
      continue;
    }
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  }
  return out;
}

}  // namespace hip::verify
