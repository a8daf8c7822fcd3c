#include "inhand/analysis.hpp"

#include <cmath>

#include "inhand/errors.hpp"

namespace inhand::analysis {

Mat6 task_inertia(const Mat6& J_a, const Mat6& M_ho) {
  const Mat6 Jinv = J_a.inverse();
  return Jinv.transpose() * M_ho * Jinv;
}

Mat6 task_coriolis(const Mat6& J_a, const Mat6& M_ho, const Mat6& C_ho,
                   const Mat6& ddt_Ja_inv) {
  const Mat6 Jinv = J_a.inverse();
  return Jinv.transpose() * M_ho * ddt_Ja_inv + Jinv.transpose() * C_ho * Jinv;
}

namespace {

MatrixXd right_pinv(const MatrixXd& A) {
  const Mat6 AAt = A * A.transpose();
  return A.transpose() * AAt.ldlt().solve(Mat6::Identity());
}

}  // namespace

ResidualMatrices residual_matrices(const FrameJacobians& jac) {
  ResidualMatrices rm;
  const Mat6 JaT_inv = jac.J_a.transpose().inverse();
  const MatrixXd JhT_inv_JhatT =
      Eigen::PartialPivLU<MatrixXd>(jac.J_h.transpose()).solve(jac.J_h_hat.transpose());
  const MatrixXd core = JaT_inv * jac.G * JhT_inv_JhatT;  // 6 x 3n
  rm.D2 = core;
  rm.D1 = core * right_pinv(jac.P.transpose() * jac.G_hat) - Mat6::Identity();
  return rm;
}

Disturbance compute_psi_eta(const FrameJacobians& jac, const Mat6& M_a, const Mat6& C_a,
                            const Vec6& e_dot, const VectorXd& tau_e, const Vec6& w_e,
                            const Vec6& u_m, const VectorXd& u_f, const Mat6& M_bar) {
  Disturbance d;
  d.residuals = residual_matrices(jac);
  const Mat6 JaT_inv = jac.J_a.transpose().inverse();
  const VectorXd JhT_inv_tau = Eigen::PartialPivLU<MatrixXd>(jac.J_h.transpose()).solve(tau_e);
  d.psi = -C_a * e_dot + JaT_inv * (jac.G * JhT_inv_tau) + JaT_inv * w_e +
          d.residuals.D1 * u_m + d.residuals.D2 * u_f;
  const Mat6 Ma_inv = M_a.inverse();
  d.eta = Ma_inv * d.psi + (Ma_inv - M_bar.inverse()) * u_m;
  return d;
}

double contraction_norm(const Mat6& M_a, const Mat6& M_bar) {
  // max |1 - lambda| over the symmetric pencil M_bar v = lambda M_a v; equals
  // ||I - M_a^{-1} M_bar|| after the M_a^{1/2} similarity, the form in which
  // the contraction requirement is meaningful for non-diagonal M_a.
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat6> es(M_bar, M_a);
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    worst = std::max(worst, std::abs(1.0 - es.eigenvalues()[i]));
  }
  return worst;
}

Vec6 estimator_controller(const Vec6& e, const Vec6& e_dot, EstimatorState& state,
                          const Mat6& M_bar, const Mat6& K1, const Mat6& K2, double dt) {
  // wdot = -M_bar^{-1} u_m - eta_hat reduces to K1 e + K2 edot once u_m is
  // substituted; the K1 part accumulates by trapezoid, the K2 part exactly.
  if (!state.initialized) {
    state.w = -e_dot;
    state.s_prev = K1 * e;
    state.e_prev = e;
    state.initialized = true;
  } else {
    const Vec6 s = K1 * e;
    state.w += 0.5 * dt * (state.s_prev + s) + K2 * (e - state.e_prev);
    state.s_prev = s;
    state.e_prev = e;
  }
  state.eta_hat = (state.w + e_dot) / state.epsilon;
  return M_bar * (-state.eta_hat - K1 * e - K2 * e_dot);
}

void estimator_step(EstimatorState& state, const Vec6& u_m, const Vec6& e_dot,
                    const Mat6& M_bar, double dt) {
  if (!state.initialized) {
    state.w = -e_dot;
    state.initialized = true;
  }
  state.eta_hat = (state.w + e_dot) / state.epsilon;
  const Vec6 wdot = -M_bar.inverse() * u_m - state.eta_hat;
  state.w += dt * wdot;
}

Vec6 matched_integral_state(const Mat6& K1, const Mat6& K2, const Vec6& e0,
                            const Vec6& edot0) {
  return -K1.inverse() * (K2 * e0 + edot0);
}

LemmaReport lemma2_check(const Eigen::Ref<const MatrixXd>& dxdq,
                         const Eigen::Ref<const MatrixXd>& J_h,
                         const Eigen::Ref<const MatrixXd>& G, const Vec6& xdot) {
  LemmaReport rep;
  Eigen::JacobiSVD<MatrixXd> svd_dx(dxdq);
  Eigen::JacobiSVD<MatrixXd> svd_jh(J_h);
  Eigen::JacobiSVD<MatrixXd> svd_g(G);
  if (svd_dx.singularValues().minCoeff() < 1e-8 ||
      svd_jh.singularValues().minCoeff() < 1e-10 ||
      svd_g.singularValues().minCoeff() < 1e-10) {
    rep.applicable = false;
    rep.detail = "rank condition violated; lemma inapplicable";
    return rep;
  }
  const Mat6 J_a = dxdq * Eigen::PartialPivLU<MatrixXd>(J_h).solve(G.transpose());
  const Vec6 xdot_o = J_a.inverse() * xdot;
  const VectorXd qdot = Eigen::PartialPivLU<MatrixXd>(J_h).solve(G.transpose() * xdot_o);
  rep.residual = std::max(xdot_o.norm(), qdot.norm());
  rep.pass = rep.residual <= 1e-12;
  return rep;
}

LemmaReport lemma4_check(const std::vector<double>& t, const std::vector<Vec6>& psi,
                         double e_norm, double edot_norm, double tol,
                         bool time_varying_disturbance) {
  LemmaReport rep;
  if (time_varying_disturbance) {
    rep.applicable = false;
    rep.detail = "time-varying disturbance; nonzero psi rate expected";
    return rep;
  }
  if (e_norm > 1e-5 || edot_norm > 1e-5) {
    rep.applicable = false;
    rep.detail = "state not converged to the equilibrium tolerance";
    return rep;
  }
  if (psi.size() < 3) {
    rep.applicable = false;
    rep.detail = "not enough samples";
    return rep;
  }
  const size_t k = psi.size() - 2;
  const double dt = t[k + 1] - t[k - 1];
  const Vec6 psi_dot = (psi[k + 1] - psi[k - 1]) / dt;
  rep.residual = psi_dot.norm();
  rep.pass = rep.residual <= tol;
  return rep;
}

PerformanceMetrics performance_metrics(const std::vector<double>& t,
                                       const std::vector<Vec6>& e,
                                       const std::vector<Vec6>& e_dot,
                                       const Vec6& tolerance_band) {
  if (e.empty() || t.size() != e.size()) throw EmptyLog();
  PerformanceMetrics pm;
  const Vec6 e0 = e.front();
  for (int c = 0; c < 6; ++c) {
    const double band = tolerance_band[c];
    // settling: last exit from the band
    double settle = 0.0;
    bool settled = std::abs(e.back()[c]) <= band;
    if (settled) {
      for (size_t k = e.size(); k-- > 0;) {
        if (std::abs(e[k][c]) > band) {
          settle = t[std::min(k + 1, e.size() - 1)];
          break;
        }
      }
    } else {
      settle = t.back();
    }
    pm.settling_time[c] = settle;
    pm.settled[c] = settled;

    // overshoot: excursion past the target, as a fraction of the commanded
    // change; peak |e| for components that start inside the band
    if (std::abs(e0[c]) > band) {
      const double s = e0[c] > 0.0 ? -1.0 : 1.0;
      double peak = 0.0;
      for (const auto& ek : e) peak = std::max(peak, s * ek[c]);
      pm.overshoot[c] = peak / std::abs(e0[c]);
    } else {
      double peak = 0.0;
      for (const auto& ek : e) peak = std::max(peak, std::abs(ek[c]));
      pm.overshoot[c] = peak;
    }
  }
  // steady state: mean |e| over the last 5 % of the horizon
  const size_t tail = std::max<size_t>(1, e.size() / 20);
  Vec6 acc = Vec6::Zero();
  for (size_t k = e.size() - tail; k < e.size(); ++k) acc += e[k].cwiseAbs();
  pm.steady_state_error = acc / static_cast<double>(tail);

  const ExpFit fit = exp_fit(t, e, e_dot);
  pm.exp_rate = fit.rate;
  pm.exp_fit_r2 = fit.r2;
  return pm;
}

ExpFit exp_fit(const std::vector<double>& t, const std::vector<Vec6>& e,
               const std::vector<Vec6>& e_dot, double floor) {
  ExpFit fit;
  if (e.size() < 4) return fit;
  std::vector<double> lognorm(e.size());
  for (size_t k = 0; k < e.size(); ++k) {
    Eigen::Matrix<double, 12, 1> v;
    v << e[k], e_dot[k];
    lognorm[k] = std::log(std::max(v.norm(), floor));
  }
  const double level = std::max(lognorm.back(), std::log(floor));
  // final decade: samples from the last time the signal was one decade above
  // its final value
  size_t start = 0;
  for (size_t k = e.size(); k-- > 0;) {
    if (lognorm[k] > level + std::log(10.0)) {
      start = k + 1;
      break;
    }
  }
  if (e.size() - start < 4) start = e.size() > 16 ? e.size() - 16 : 0;

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  const double n = static_cast<double>(e.size() - start);
  for (size_t k = start; k < e.size(); ++k) {
    st += t[k];
    sy += lognorm[k];
    stt += t[k] * t[k];
    sty += t[k] * lognorm[k];
    syy += lognorm[k] * lognorm[k];
  }
  const double denom = n * stt - st * st;
  if (std::abs(denom) < 1e-30) return fit;
  fit.slope = (n * sty - st * sy) / denom;
  fit.rate = -fit.slope;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - fit.slope * (sty - st * sy / n);
  fit.r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 0.0;
  return fit;
}

}  // namespace inhand::analysis
