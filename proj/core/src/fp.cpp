#include "optlab/fp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace optlab {

CMat FPProblem::rows(const CVec& phi) const {
  if (channels == nullptr) return direct_rows;
  return effective_rows(phi, matrices());
}

const std::vector<CMat>& FPProblem::matrices() const {
  if (channels == nullptr) throw std::logic_error("FPProblem: no reflected channels");
  if (uses_estimate) {
    if (!channels->est_G) throw std::logic_error("FPProblem: estimate requested but absent");
    return *channels->est_G;
  }
  return channels->true_G;
}

int FPProblem::num_ues() const {
  return channels ? static_cast<int>(channels->true_G.size())
                  : static_cast<int>(direct_rows.rows());
}

int FPProblem::num_bs_antennas() const {
  return channels ? static_cast<int>(channels->true_G[0].cols())
                  : static_cast<int>(direct_rows.cols());
}

double lagrangian_objective(const CMat& rows, const CMat& W, const RVec& alpha,
                            double b, double sigma2) {
  // b sum(log2(1+a) + (eta-a)/((1+eta) ln 2)); the 1/ln 2 on the linear part
  // keeps the multiplier update a = eta the exact maximizer of the bits-scaled
  // surrogate, which is what makes the objective trace nondecreasing. The
  // (eta-a) grouping stays exact when eta and a are both huge and nearly
  // equal, where the direct transcription -a + (1+a) eta/(1+eta) cancels
  // catastrophically.
  double total = 0.0;
  for (int k = 0; k < rows.rows(); ++k) {
    const double eta = sinr_rows(rows, W, sigma2, k);
    const double a = alpha[k];
    total += std::log2(1.0 + a) + (eta - a) / ((1.0 + eta) * std::numbers::ln2);
  }
  return b * total;
}

RVec update_alpha(const CMat& rows, const CMat& W, double sigma2) {
  RVec a(rows.rows());
  for (int k = 0; k < rows.rows(); ++k) a[k] = sinr_rows(rows, W, sigma2, k);
  return a;
}

RVec alpha_hat(const RVec& alpha, double b) {
  return b * (alpha.array() + 1.0);
}

CVec update_lambda(const CMat& rows, const CMat& W, const RVec& a_hat, double sigma2) {
  const int K = static_cast<int>(rows.rows());
  CVec lambda(K);
  for (int k = 0; k < K; ++k) {
    const CVec s = (rows.row(k) * W).transpose();
    const double denom = s.squaredNorm() + sigma2;
    lambda[k] = std::sqrt(a_hat[k]) * s[k] / denom;
  }
  return lambda;
}

namespace {

struct EigSolve {
  CMat vectors;
  RVec values;
};

EigSolve normal_matrix_eig(const CMat& rows, const CVec& lambda) {
  const Eigen::Index M = rows.cols();
  CMat D = CMat::Zero(M, M);
  for (int i = 0; i < rows.rows(); ++i)
    D.noalias() += std::norm(lambda[i]) * rows.row(i).adjoint() * rows.row(i);
  Eigen::SelfAdjointEigenSolver<CMat> eig(D);
  return {eig.eigenvectors(), eig.eigenvalues()};
}

}  // namespace

CMat update_precoder(const CMat& rows, const CVec& lambda, const RVec& a_hat,
                     double p_max, double bisection_tol_rel) {
  const int K = static_cast<int>(rows.rows());
  const Eigen::Index M = rows.cols();
  if (lambda.isZero(0.0)) return CMat::Zero(M, K);

  const EigSolve eig = normal_matrix_eig(rows, lambda);
  // Targets y_k = sqrt(a_hat_k) lambda_k rho_k^H in the eigenbasis.
  CMat beta(M, K);
  for (int k = 0; k < K; ++k) {
    const CVec y = std::sqrt(a_hat[k]) * lambda[k] * rows.row(k).adjoint();
    beta.col(k) = eig.vectors.adjoint() * y;
  }
  const RVec b2 = beta.rowwise().squaredNorm().real();

  const auto power_at = [&](double kappa) {
    double p = 0.0;
    for (Eigen::Index j = 0; j < M; ++j) {
      const double d = eig.values[j] + kappa;
      p += b2[j] / (d * d);
    }
    return p;
  };

  const double ev_max = eig.values.maxCoeff();
  const auto solve_with = [&](double kappa) {
    CMat W(M, K);
    for (int k = 0; k < K; ++k) {
      CVec scaled(M);
      for (Eigen::Index j = 0; j < M; ++j) {
        const double d = eig.values[j] + kappa;
        if (kappa == 0.0 && eig.values[j] <= ev_max * 1e-12) {
          scaled[j] = 0.0;  // minimum-norm component drop on the null space
        } else {
          scaled[j] = beta(j, k) / d;
        }
      }
      W.col(k) = eig.vectors * scaled;
    }
    return W;
  };

  // Power along null-space components is unbounded as kappa -> 0; use the
  // masked minimum-norm power for the kappa = 0 feasibility test.
  double p0 = 0.0;
  for (Eigen::Index j = 0; j < M; ++j)
    if (eig.values[j] > ev_max * 1e-12) p0 += b2[j] / (eig.values[j] * eig.values[j]);
  if (p0 <= p_max) return solve_with(0.0);

  double lo = 0.0, hi = std::sqrt(b2.sum() / p_max);
  while (power_at(hi) > p_max) {
    lo = hi;
    hi *= 2.0;
  }
  const double tol = bisection_tol_rel * p_max;
  for (int it = 0; it < 200 && p_max - power_at(hi) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (power_at(mid) > p_max ? lo : hi) = mid;
  }
  return solve_with(hi);
}

CVec update_delta(const CMat& rows, const CMat& W, const RVec& a_hat, double sigma2) {
  return update_lambda(rows, W, a_hat, sigma2);
}

PhiQuadratic build_phi_quadratic(const std::vector<CMat>& G, const CMat& W,
                                 const CVec& delta, const RVec& a_hat, double sigma2) {
  const int K = static_cast<int>(G.size());
  const Eigen::Index N = G[0].rows();
  PhiQuadratic q;
  q.U = CMat::Zero(N, N);
  q.v = CVec::Zero(N);
  for (int k = 0; k < K; ++k) {
    const double w2 = std::norm(delta[k]);
    if (w2 > 0.0) {
      for (int i = 0; i < W.cols(); ++i) {
        const CVec b_ki = G[k] * W.col(i);
        q.U.noalias() += w2 * b_ki * b_ki.adjoint();
      }
    }
    q.v += std::sqrt(a_hat[k]) * std::conj(delta[k]) * (G[k] * W.col(k));
    q.C += w2 * sigma2;
  }
  return q;
}

double phi_quadratic_value(const PhiQuadratic& q, const CVec& phi) {
  const CVec x = phi.conjugate();
  const double quad = (x.adjoint() * q.U * x)(0).real();
  const double lin = 2.0 * (x.adjoint() * q.v)(0).real();
  return lin - quad - q.C;
}

CVec maximize_phi_quadratic(const PhiQuadratic& q, const CVec& phi_init,
                            int max_sweeps, double tol) {
  const Eigen::Index N = q.v.size();
  CVec x = phi_init.conjugate();
  double prev = phi_quadratic_value(q, phi_init);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index n = 0; n < N; ++n) {
      // Coordinate objective 2 Re(conj(x_n) c) - U_nn |x_n|^2 with
      // c = v_n - sum_{m != n} U_nm x_m.
      const cplx q_n = (q.U.row(n) * x)(0) - q.U(n, n) * x[n];
      const cplx c = q.v[n] - q_n;
      const double diag = q.U(n, n).real();
      if (diag > 0.0) {
        cplx cand = c / diag;
        const double mag = std::abs(cand);
        if (mag > 1.0) cand /= mag;
        x[n] = cand;
      } else if (std::abs(c) > 0.0) {
        x[n] = c / std::abs(c);  // linear coordinate: boundary optimum
      }
    }
    const double cur = phi_quadratic_value(q, x.conjugate());
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) {
      prev = cur;
      break;
    }
    prev = cur;
  }
  return x.conjugate();
}

CVec optimize_phi(const CVec& delta, const RVec& a_hat, const CMat& W,
                  const ChannelSet& ch, const CVec& phi_init, double sigma2,
                  bool use_estimate) {
  const std::vector<CMat>& G = use_estimate && ch.est_G ? *ch.est_G : ch.true_G;
  const PhiQuadratic q = build_phi_quadratic(G, W, delta, a_hat, sigma2);
  return maximize_phi_quadratic(q, phi_init);
}

CMat matched_equal_power(const CMat& rows, double p_max) {
  const int K = static_cast<int>(rows.rows());
  CMat W = CMat::Zero(rows.cols(), K);
  const double per_column = p_max / K;
  for (int k = 0; k < K; ++k) {
    const double n2 = rows.row(k).squaredNorm();
    if (n2 > 0.0) W.col(k) = rows.row(k).adjoint() * std::sqrt(per_column / n2);
  }
  return W;
}

namespace {

CMat concentrated_precoder(const CMat& rows, double p_max, int k_star) {
  CMat W = CMat::Zero(rows.cols(), rows.rows());
  const CVec w = rows.row(k_star).adjoint();
  const double n = w.norm();
  if (n > 0.0) W.col(k_star) = w * (std::sqrt(p_max) / n);
  return W;
}

void check_finite(double v, int iter) {
  if (!std::isfinite(v))
    throw std::runtime_error("algorithm1: non-finite objective at outer iteration " +
                             std::to_string(iter));
}

}  // namespace

FPResult fp_run(const FPProblem& prob, const FPConfig& cfg,
                const CVec& phi_init, const CMat& w_init) {
  const double b = prob.bandwidth;
  const double s2 = prob.sigma2;
  const bool do_phi = prob.channels != nullptr && prob.optimize_reflection;

  CVec phi = phi_init;
  CMat W = w_init;
  CMat rows = prob.rows(phi);
  FPResult res;
  RVec alpha = update_alpha(rows, W, s2);

  // Block alternation can crawl when two users sit near a tie: each multiplier
  // refresh nudges the precoder, which nudges the rates, and the pair inches
  // along an escape path for hundreds of passes. A secant step across
  // consecutive outer iterates jumps along that path with a geometric step
  // ladder. Candidates are projected back to the feasible set and judged by
  // the achieved rate, the envelope of the surrogate over the multipliers;
  // since every trace entry sits at or below the current iterate's rate and
  // the next multiplier refresh lands exactly on it, adopting a
  // rate-improving candidate keeps the trace nondecreasing.
  CMat w_anchor;
  CVec phi_anchor;
  bool have_anchor = false;
  const auto try_secant = [&] {
    const CMat d_w = W - w_anchor;
    const CVec d_phi = phi - phi_anchor;
    double best = sum_rate_rows(rows, W, b, s2);
    CMat best_w;
    CVec best_phi;
    bool improved = false;
    for (double theta : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
      CMat w_c = W + theta * d_w;
      const double p = w_c.squaredNorm();
      if (p > prob.p_max && p > 0.0) w_c *= std::sqrt(prob.p_max / p);
      CVec phi_c = phi + theta * d_phi;
      for (Eigen::Index n = 0; n < phi_c.size(); ++n) {
        const double mag = std::abs(phi_c[n]);
        if (mag > 1.0) phi_c[n] /= mag;
      }
      const double val = sum_rate_rows(prob.rows(phi_c), w_c, b, s2);
      if (std::isfinite(val) && val > best) {
        best = val;
        best_w = std::move(w_c);
        best_phi = std::move(phi_c);
        improved = true;
      }
    }
    if (improved) {
      W = std::move(best_w);
      phi = std::move(best_phi);
      rows = prob.rows(phi);
    }
  };

  double last = -1.0;
  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    alpha = update_alpha(rows, W, s2);
    const RVec a_hat_v = alpha_hat(alpha, b);
    res.trace.push_back(lagrangian_objective(rows, W, alpha, b, s2));
    check_finite(res.trace.back(), outer);

    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      const CVec lambda = update_lambda(rows, W, a_hat_v, s2);
      W = update_precoder(rows, lambda, a_hat_v, prob.p_max, cfg.bisection_tol);
    }
    res.trace.push_back(lagrangian_objective(rows, W, alpha, b, s2));
    check_finite(res.trace.back(), outer);

    if (do_phi) {
      const std::vector<CMat>& G = prob.matrices();
      // G_k w_i products are fixed while W is; precompute the per-UE
      // quadratic pieces once per block.
      std::vector<CMat> U_k(G.size());
      std::vector<CVec> b_kk(G.size());
      const int K = static_cast<int>(G.size());
      for (int k = 0; k < K; ++k) {
        U_k[k] = CMat::Zero(phi.size(), phi.size());
        for (int i = 0; i < W.cols(); ++i) {
          const CVec b_ki = G[k] * W.col(i);
          U_k[k].noalias() += b_ki * b_ki.adjoint();
          if (i == k) b_kk[k] = b_ki;
        }
      }
      for (int inner = 0; inner < cfg.inner_iters; ++inner) {
        rows = prob.rows(phi);
        const CVec delta = update_delta(rows, W, a_hat_v, s2);
        PhiQuadratic q;
        q.U = CMat::Zero(phi.size(), phi.size());
        q.v = CVec::Zero(phi.size());
        for (int k = 0; k < K; ++k) {
          const double w2 = std::norm(delta[k]);
          q.U.noalias() += w2 * U_k[k];
          q.v += std::sqrt(a_hat_v[k]) * std::conj(delta[k]) * b_kk[k];
          q.C += w2 * s2;
        }
        phi = maximize_phi_quadratic(q, phi);
      }
      rows = prob.rows(phi);
      res.trace.push_back(lagrangian_objective(rows, W, alpha, b, s2));
      check_finite(res.trace.back(), outer);
    }

    const double cur = res.trace.back();
    res.iterations = outer + 1;
    if (outer > 0 && std::abs(cur - last) <= cfg.convergence_tol * std::max(1.0, std::abs(cur))) {
      res.converged = true;
      last = cur;
      break;
    }
    last = cur;

    const CMat w_end = W;
    const CVec phi_end = phi;
    if (have_anchor) try_secant();
    w_anchor = w_end;
    phi_anchor = phi_end;
    have_anchor = true;
  }

  res.W = std::move(W);
  res.phi = phi;
  res.sum_rate = sum_rate_rows(prob.rows(phi), res.W, b, s2);
  return res;
}

FPResult algorithm1(const FPProblem& prob, const FPConfig& cfg) {
  const int K = prob.num_ues();
  const CVec ones = CVec::Ones(prob.channels ? prob.matrices()[0].rows() : 1);
  const CMat rows0 = prob.rows(ones);

  // Strongest UE by row norm; seeds the concentrated start.
  int k_star = 0;
  double best_norm = -1.0;
  for (int k = 0; k < K; ++k) {
    const double n = rows0.row(k).norm();
    if (n > best_norm) {
      best_norm = n;
      k_star = k;
    }
  }

  std::vector<FPResult> candidates;
  candidates.push_back(fp_run(prob, cfg, ones, matched_equal_power(rows0, prob.p_max)));

  if (prob.channels != nullptr && prob.optimize_reflection) {
    // Concentrated start: phase-align the reflection to the strongest UE's
    // first column, then pour all power into its matched beam.
    const std::vector<CMat>& G = prob.matrices();
    CVec phi_c(ones.size());
    for (Eigen::Index n = 0; n < phi_c.size(); ++n) {
      const cplx g = G[k_star](n, 0);
      phi_c[n] = std::abs(g) > 0.0 ? std::conj(g) / std::abs(g) : cplx(1.0);
    }
    const CMat rows_c = prob.rows(phi_c);
    candidates.push_back(fp_run(prob, cfg, phi_c, concentrated_precoder(rows_c, prob.p_max, k_star)));

    // Continuation of the pinned-reflection optimum; its first surrogate point
    // equals that baseline's rate, and the trace never decreases, so the
    // winner is guaranteed to be at least the pinned baseline.
    FPProblem pinned = prob;
    pinned.optimize_reflection = false;
    const FPResult fixed = fp_run(pinned, cfg, ones, matched_equal_power(rows0, prob.p_max));
    candidates.push_back(fp_run(prob, cfg, ones, fixed.W));
  } else {
    candidates.push_back(fp_run(prob, cfg, ones, concentrated_precoder(rows0, prob.p_max, k_star)));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].sum_rate > candidates[best].sum_rate) best = i;
  return std::move(candidates[best]);
}

}  // namespace optlab
