#pragma once

#include <functional>
#include <vector>

#include "optlab/channel.hpp"
#include "optlab/types.hpp"

namespace optlab {

struct FPConfig {
  int max_outer_iters = 100;
  double convergence_tol = 1e-6;   // relative change of the surrogate objective
  int inner_iters = 20;            // per-block alternations
  double bisection_tol = 1e-12;    // power residual, relative to P_max
};

struct FPState {
  CMat W;                       // M x K columns
  CVec phi;                     // length N, |phi_n| <= 1
  RVec alpha;                   // length K
  CVec lambda;
  CVec delta;
  std::vector<double> objective_trace;  // surrogate value after each block update
};

// Inputs shared by every update: either reflected channels (rows recomputed
// from phi) or fixed direct rows with no reflector block.
struct FPProblem {
  const ChannelSet* channels = nullptr;     // nullptr for the direct baseline
  CMat direct_rows;                          // used when channels == nullptr
  bool optimize_reflection = true;           // false pins phi (all-ones baseline)
  double sigma2 = 0.0;
  double bandwidth = 0.0;
  double p_max = 0.0;

  bool uses_estimate = false;  // run the updates on est_G instead of true_G

  CMat rows(const CVec& phi) const;
  const std::vector<CMat>& matrices() const;
  int num_ues() const;
  int num_bs_antennas() const;
};

// Surrogate objective; algebraically b * sum(log2(1+a) + (eta-a)/((1+eta) ln 2)),
// a grouping that avoids the cancellation the direct transcription hits at
// large eta. For fixed (W, phi) it is maximized exactly at a = eta, where it
// equals the sum rate.
double lagrangian_objective(const CMat& rows, const CMat& W, const RVec& alpha,
                            double b, double sigma2);

RVec update_alpha(const CMat& rows, const CMat& W, double sigma2);

RVec alpha_hat(const RVec& alpha, double b);

CVec update_lambda(const CMat& rows, const CMat& W, const RVec& a_hat, double sigma2);

// Ridge-regularized solve with the smallest kappa >= 0 meeting the power cap;
// kappa found by bisection on the eigen-decomposed normal matrix.
CMat update_precoder(const CMat& rows, const CVec& lambda, const RVec& a_hat,
                     double p_max, double bisection_tol_rel);

CVec update_delta(const CMat& rows, const CMat& W, const RVec& a_hat, double sigma2);

struct PhiQuadratic {
  CMat U;   // N x N positive semidefinite
  CVec v;   // length N
  double C = 0.0;
};

// Aggregates of the reflector subproblem maximize -phi^H U phi + 2 Re(v^H phi) - C.
PhiQuadratic build_phi_quadratic(const std::vector<CMat>& G, const CMat& W,
                                 const CVec& delta, const RVec& a_hat, double sigma2);

double phi_quadratic_value(const PhiQuadratic& q, const CVec& phi);

// Exact per-element coordinate ascent under |phi_n| <= 1; concave, so this
// reaches the constrained optimum. Returned objective never drops below the
// value at phi_init.
CVec maximize_phi_quadratic(const PhiQuadratic& q, const CVec& phi_init,
                            int max_sweeps = 50, double tol = 1e-10);

CVec optimize_phi(const CVec& delta, const RVec& a_hat, const CMat& W,
                  const ChannelSet& ch, const CVec& phi_init, double sigma2,
                  bool use_estimate);

struct FPResult {
  CMat W;
  CVec phi;
  double sum_rate = 0.0;           // achieved on the problem's channel matrices
  std::vector<double> trace;       // winning start only
  int iterations = 0;
  bool converged = false;
};

// Alternating maximization with three starts: all-ones reflection with
// matched equal-power precoding, a single-UE concentrated start, and a
// continuation of the pinned-reflection solution. The flat symmetric point is
// a stationary trap for the pinned start, so the extra starts are load-bearing
// rather than a tuning nicety; the continuation start also guarantees the
// result never falls below the pinned-reflection baseline on the same drop.
FPResult algorithm1(const FPProblem& prob, const FPConfig& cfg);

// Single-start inner loop, exposed for tests and the continuation start.
FPResult fp_run(const FPProblem& prob, const FPConfig& cfg,
                const CVec& phi_init, const CMat& w_init);

// Equal-power matched filters for the given rows, total power P.
CMat matched_equal_power(const CMat& rows, double p_max);

}  // namespace optlab
