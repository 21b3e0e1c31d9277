#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "hip/verify.hpp"

using hip::assembly::AssemblyContext;
using hip::assembly::KappaMode;
using hip::assembly::PenaltyConfig;
using hip::assembly::Scheme;
using hip::mesh::ElementKind;
using hip::verify::Problem;

namespace {

const double pi = std::acos(-1.0);

double bump(double t) { return t * (1.0 - t) * std::exp(-t * t); }

// Zero-solution problem: the error norms of a composite field against it are
// the norms of the field itself.
Problem zero_problem() {
  Problem z;
  z.name = "zero";
  z.K = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
  z.u = [](const Eigen::Vector2d&) { return 0.0; };
  z.f = [](const Eigen::Vector2d&) { return 0.0; };
  z.grad_u = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); };
  return z;
}

Eigen::VectorXd seeded_vector(long n, std::mt19937& rng) {
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i)
    v(i) = static_cast<double>(rng()) / 4294967296.0 - 0.5;
  return v;
}

}  // namespace

TEST_CASE("problem a: isotropic bump") {
  const Problem p = hip::verify::make_problem("a", 1.0);
  CHECK(p.name == "a");
  CHECK(p.u({0.3, 0.7}) == doctest::Approx(bump(0.3) * bump(0.7)).epsilon(1e-14));
  CHECK(p.u({0.0, 0.4}) == doctest::Approx(0.0).scale(1.0));
  CHECK(p.u({0.4, 1.0}) == doctest::Approx(0.0).scale(1.0));
  CHECK(p.K({0.3, 0.3}).isApprox(Eigen::Matrix2d::Identity()));

  const double h = 1e-5;
  for (const Eigen::Vector2d q : {Eigen::Vector2d{0.31, 0.57}, Eigen::Vector2d{0.73, 0.21}}) {
    const Eigen::Vector2d g = p.grad_u(q);
    const double gx = (p.u({q.x() + h, q.y()}) - p.u({q.x() - h, q.y()})) / (2 * h);
    const double gy = (p.u({q.x(), q.y() + h}) - p.u({q.x(), q.y() - h})) / (2 * h);
    CHECK(g.x() == doctest::Approx(gx).epsilon(1e-7));
    CHECK(g.y() == doctest::Approx(gy).epsilon(1e-7));

    // f = -laplace(u) for the identity tensor.
    const double uxx =
        (p.u({q.x() + h, q.y()}) - 2 * p.u(q) + p.u({q.x() - h, q.y()})) / (h * h);
    const double uyy =
        (p.u({q.x(), q.y() + h}) - 2 * p.u(q) + p.u({q.x(), q.y() - h})) / (h * h);
    CHECK(p.f(q) == doctest::Approx(-(uxx + uyy)).epsilon(1e-4));
  }
}

TEST_CASE("problems b and c: quadrant-wise anisotropy") {
  const double lambda = 1e-3;
  for (const char* name : {"b", "c"}) {
    const Problem p = hip::verify::make_problem(name, lambda);
    CHECK(p.lambda == lambda);
    CHECK(p.u({0.25, 0.5}) == doctest::Approx(std::sin(pi * 0.25)).epsilon(1e-14));
    CHECK(p.u({0.0, 0.3}) == doctest::Approx(0.0).scale(1.0));

    // K = diag(1, lambda) where x and y sit on the same side of 1/2,
    // diag(1/lambda, 1) otherwise.
    for (const auto& [q, k00, k11] :
         std::vector<std::tuple<Eigen::Vector2d, double, double>>{
             {{0.25, 0.25}, 1.0, lambda},
             {{0.75, 0.75}, 1.0, lambda},
             {{0.75, 0.25}, 1.0 / lambda, 1.0},
             {{0.25, 0.75}, 1.0 / lambda, 1.0}}) {
      const Eigen::Matrix2d K = p.K(q);
      CHECK(K(0, 0) == doctest::Approx(k00).epsilon(1e-14));
      CHECK(K(1, 1) == doctest::Approx(k11).epsilon(1e-14));
      CHECK(K(0, 1) == doctest::Approx(0.0).scale(1.0));

      // With constant K per quadrant, -div(K grad u) = (K00 + K11) pi^2 u.
      CHECK(p.f(q) ==
            doctest::Approx((k00 + k11) * pi * pi * p.u(q)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(hip::verify::make_problem("b", 0.0), std::invalid_argument);
  CHECK_THROWS_AS(hip::verify::make_problem("d", 1.0), std::invalid_argument);
}

TEST_CASE("ecr: log-ratio rates and saturation") {
  const std::vector<double> hs{1.0 / 8, 1.0 / 16};
  const std::vector<double> rates = hip::verify::ecr({1.7e-4, 2.1e-5}, hs);
  REQUIRE(rates.size() == 1);
  CHECK(rates[0] == doctest::Approx(3.0170).epsilon(1e-4));

  const std::vector<double> sat = hip::verify::ecr({1e-3, 0.0}, hs);
  CHECK(std::isinf(sat[0]));
  CHECK(sat[0] > 0.0);

  CHECK_THROWS_AS(hip::verify::ecr({1.0}, hs), std::invalid_argument);
  CHECK_THROWS_AS(hip::verify::ecr({1.0, 0.5}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(hip::verify::ecr({1.0, -0.5}, hs), std::invalid_argument);
}

TEST_CASE("expected rates: a-priori table") {
  using hip::verify::expected_rates;

  auto er = expected_rates(+1, 0.0, 2);
  CHECK(er.mu == doctest::Approx(3.0));
  CHECK(er.energy == doctest::Approx(2.0));
  CHECK(er.l2 == doctest::Approx(3.0));

  er = expected_rates(+1, -1.0, 2);  // symmetric: l2 loses 2|delta|
  CHECK(er.energy == doctest::Approx(1.0));
  CHECK(er.l2 == doctest::Approx(1.0));

  er = expected_rates(+1, 0.5, 2);  // positive delta costs nothing for SIP
  CHECK(er.energy == doctest::Approx(2.0));
  CHECK(er.l2 == doctest::Approx(3.0));

  er = expected_rates(0, 0.0, 2);  // adjoint inconsistency: one order lost
  CHECK(er.energy == doctest::Approx(2.0));
  CHECK(er.l2 == doctest::Approx(2.0));

  er = expected_rates(0, 2.0, 2);  // delta = 2 restores the optimal rate
  CHECK(er.l2 == doctest::Approx(3.0));

  er = expected_rates(0, 1.0, 2);
  CHECK(er.l2 == doctest::Approx(2.5));

  er = expected_rates(0, -1.0, 2);
  CHECK(er.energy == doctest::Approx(1.0));
  CHECK(er.l2 == doctest::Approx(0.5));

  er = expected_rates(-1, -0.5, 3);
  CHECK(er.energy == doctest::Approx(2.5));
  CHECK(er.l2 == doctest::Approx(2.25));

  // Limited regularity caps mu = min(k+1, s).
  er = expected_rates(+1, 0.0, 3, 2.0);
  CHECK(er.mu == doctest::Approx(2.0));
  CHECK(er.energy == doctest::Approx(1.0));
  CHECK(er.l2 == doctest::Approx(2.0));

  CHECK_THROWS_AS(expected_rates(2, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(expected_rates(1, 0.0, 0), std::invalid_argument);
}

TEST_CASE("min_sample: reports the lowest quadrature sample") {
  const hip::mesh::Mesh m = hip::mesh::generate(ElementKind::triangle, 2);
  const hip::fem::DofMap dm = hip::fem::build_dofmap(m, 1);
  const AssemblyContext ctx(m, 1);

  // Make u_h == -1 everywhere: only the constant mode is set.
  Eigen::Matrix<double, Eigen::Dynamic, 2> origin(1, 2);
  origin << 0.25, 0.25;
  const double phi0 = ctx.basis().eval(origin)(0, 0);
  hip::assembly::CompositeField field;
  field.interior = Eigen::VectorXd::Zero(dm.n_interior);
  for (size_t e = 0; e < m.elements.size(); ++e)
    field.interior(dm.elem_offset(static_cast<int>(e))) = -1.0 / phi0;
  field.trace = Eigen::VectorXd::Zero(dm.n_trace);

  CHECK(hip::verify::min_sample(m, ctx, dm, field) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("collocated L2 error isolates the superconvergent component") {
  // On the kappa-orthogonal quad grid at alpha0 = 2 the distance between u_h
  // and the local L2 projection of u converges one order faster than the
  // total error; sampling at the (k+1)-point Gauss grid filters the
  // projection component out.
  const hip::mesh::Mesh m = hip::mesh::generate(ElementKind::quad, 8);
  const hip::fem::DofMap dm = hip::fem::build_dofmap(m, 1);
  const AssemblyContext ctx(m, 1);
  const Problem prob = hip::verify::make_problem("c", 1.0);
  const PenaltyConfig pen{2.0, 0.0, KappaMode::normal};

  const auto sol = hip::assembly::solve_hip(m, ctx, dm, prob.K, Scheme::sip(), pen, prob.f);
  const double full = hip::verify::l2_error(m, ctx, dm, sol.field, prob);
  const double disc = hip::verify::l2_error_discrete(m, ctx, dm, sol.field, prob);

  CHECK(full > 3e-3);
  CHECK(full < 6e-3);
  CHECK(disc == doctest::Approx(1.7e-4).epsilon(0.25));
  CHECK(full / disc > 5.0);
}

TEST_CASE("norm equivalence: enriched vs energy norm of discrete fields") {
  // For piecewise polynomials the enriched norm is controlled by the energy
  // norm with constant 1 + eta Ctr^2, eta = diameter * perimeter / area; on
  // these grids eta is the same for every element.
  const Problem zero = zero_problem();
  std::mt19937 rng(777);

  for (int k : {1, 2, 3}) {
    const hip::mesh::Mesh m = hip::mesh::generate(ElementKind::triangle, 4);
    const hip::fem::DofMap dm = hip::fem::build_dofmap(m, k);
    const AssemblyContext ctx(m, k);
    const PenaltyConfig pen{4.0, 0.0, KappaMode::normal};

    const auto& el = m.elements[0];
    const double perimeter = el.cell_size * (2.0 + std::sqrt(2.0));
    const double eta = el.diameter * perimeter / el.area;
    const double ctr2 = std::pow(hip::fem::trace_constant(k), 2);
    const double bound = 1.0 + eta * ctr2;

    for (int trial = 0; trial < 40; ++trial) {
      hip::assembly::CompositeField v;
      v.interior = seeded_vector(dm.n_interior, rng);
      v.trace = seeded_vector(dm.n_trace, rng);
      const double energy = hip::verify::energy_error(m, ctx, dm, v, zero, pen);
      const double enriched = hip::verify::enriched_error(m, ctx, dm, v, zero, pen);
      const double ratio2 = (enriched * enriched) / (energy * energy);
      CHECK(ratio2 >= 1.0 - 1e-12);
      CHECK(ratio2 <= bound);
    }
  }
}

TEST_CASE("boundedness: bilinear form controlled by the enriched norms") {
  const Problem zero = zero_problem();
  std::mt19937 rng(777);

  for (int k : {1, 2}) {
    const hip::mesh::Mesh m = hip::mesh::generate(ElementKind::triangle, 4);
    const hip::fem::DofMap dm = hip::fem::build_dofmap(m, k);
    const AssemblyContext ctx(m, k);
    const PenaltyConfig pen{4.0, 0.0, KappaMode::normal};

    const auto [A, b] = hip::assembly::assemble_full(
        m, ctx, dm, zero.K, Scheme::sip(), pen, zero.f);

    const auto& el = m.elements[0];
    const double eta = el.diameter * (2.0 + std::sqrt(2.0)) * el.cell_size / el.area;
    const double rho = std::sqrt(1.0 + eta * std::pow(hip::fem::trace_constant(k), 2));

    for (int trial = 0; trial < 20; ++trial) {
      hip::assembly::CompositeField w, v;
      w.interior = seeded_vector(dm.n_interior, rng);
      w.trace = seeded_vector(dm.n_trace, rng);
      v.interior = seeded_vector(dm.n_interior, rng);
      v.trace = seeded_vector(dm.n_trace, rng);

      Eigen::VectorXd wx(dm.total()), vx(dm.total());
      wx << w.interior, w.trace;
      vx << v.interior, v.trace;
      const double a_wv = std::abs(wx.dot(A.matvec(vx)));
      const double nw = hip::verify::enriched_error(m, ctx, dm, w, zero, pen);
      const double nv = hip::verify::enriched_error(m, ctx, dm, v, zero, pen);
      CHECK(a_wv <= rho * nw * nv);
    }
  }
}
