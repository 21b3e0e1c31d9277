#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hip/hip_assembly.hpp"

// Manufactured problems, discretization-error norms and the a-priori rate
// predictors used by the convergence harness.

namespace hip::verify {

struct Problem {
  std::string name;   // "a", "b" or "c"
  double lambda = 1.0;
  assembly::TensorField K;
  assembly::ScalarField u;
  assembly::ScalarField f;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad_u;
};

// "a": isotropic smooth problem, u = X(x)X(y) with X(t) = t(1-t)exp(-t^2).
// "b", "c": u = sin(pi x) sin(pi y) with piecewise-constant anisotropy,
// K = diag(1, lambda) on the lower-left/upper-right quadrants and
// K = diag(1/lambda, 1) on the other two.
Problem make_problem(const std::string& test, double lambda);

// L2 error with the context's volume rule (exactness >= 2k+4 by default).
double l2_error(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                const fem::DofMap& dofmap, const assembly::CompositeField& field,
                const Problem& prob);

// Same integrand sampled with the minimal rule of exactness 2k+1, i.e. the
// (k+1)-point Gauss grid per element.  At those points the interpolation
// component of the error collapses, which exposes the superconvergent
// distance between u_h and the local L2 projection of u.
double l2_error_discrete(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                         const fem::DofMap& dofmap, const assembly::CompositeField& field,
                         const Problem& prob);

// Energy norm of the error: broken K-weighted gradient plus tau-weighted
// face jumps of (u - u_h) against the trace error.
double energy_error(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                    const fem::DofMap& dofmap, const assembly::CompositeField& field,
                    const Problem& prob, const assembly::PenaltyConfig& pen);

// Energy norm augmented with the diameter-weighted boundary flux seminorm
// sum_E h_E || K^{1/2} grad(u - u_h) ||^2_{dE}.
double enriched_error(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                      const fem::DofMap& dofmap, const assembly::CompositeField& field,
                      const Problem& prob, const assembly::PenaltyConfig& pen);

// Smallest value of u_h over all volume quadrature points; a negative value
// flags an undershoot of the (positive) exact solution.
double min_sample(const mesh::Mesh& m, const assembly::AssemblyContext& ctx,
                  const fem::DofMap& dofmap, const assembly::CompositeField& field);

struct ExpectedRates {
  double mu = 0.0;       // min(k+1, s)
  double r_delta = 0.0;  // min(0, delta)
  double s_delta = 0.0;  // scheme-dependent L2 shift
  double energy = 0.0;   // mu + r_delta - 1
  double l2 = 0.0;       // mu + s_delta
};

// A-priori predictions for solution regularity s (defaults to unlimited
// smoothness, giving mu = k+1).
ExpectedRates expected_rates(int epsilon, double delta, int k,
                             double s = std::numeric_limits<double>::infinity());

// Empirical convergence rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}); a zero
// follow-up error yields +infinity (saturated).
std::vector<double> ecr(const std::vector<double>& errors, const std::vector<double>& hs);

}  // namespace hip::verify
