#pragma once

#include <string>
#include <vector>

#include "inhand/control.hpp"
#include "inhand/dynamics.hpp"
#include "inhand/types.hpp"

namespace inhand::analysis {

// Jacobians feeding the task-space decomposition. True kinematics from the
// simulator, hatted approximations from the controller.
struct FrameJacobians {
  MatrixXd J_h;      // true, contact offsets
  MatrixXd G;        // true grasp map
  MatrixXd J_h_hat;  // controller approximation
  MatrixXd G_hat;
  Mat6 P = Mat6::Identity();
  Mat6 J_a = Mat6::Identity();
};

// M_a = J_a^{-T} M_ho J_a^{-1}.
Mat6 task_inertia(const Mat6& J_a, const Mat6& M_ho);

// C_a = J_a^{-T} M_ho d/dt[J_a^{-1}] + J_a^{-T} C_ho J_a^{-1}.
Mat6 task_coriolis(const Mat6& J_a, const Mat6& M_ho, const Mat6& C_ho,
                   const Mat6& ddt_Ja_inv);

struct ResidualMatrices {
  Mat6 D1 = Mat6::Zero();
  MatrixXd D2;
};

// D1 = J_a^{-T} G J_h^{-T} J_h_hat^T (P^T G_hat)^+ - I,
// D2 = J_a^{-T} G J_h^{-T} J_h_hat^T.
ResidualMatrices residual_matrices(const FrameJacobians& jac);

struct Disturbance {
  Vec6 psi = Vec6::Zero();
  Vec6 eta = Vec6::Zero();
  ResidualMatrices residuals;
};

// psi = -C_a edot + J_a^{-T} G J_h^{-T} tau_e + J_a^{-T} w_e + D1 u_m + D2 u_f;
// eta = M_a^{-1} psi + (M_a^{-1} - M_bar^{-1}) u_m.
Disturbance compute_psi_eta(const FrameJacobians& jac, const Mat6& M_a, const Mat6& C_a,
                            const Vec6& e_dot, const VectorXd& tau_e, const Vec6& w_e,
                            const Vec6& u_m, const VectorXd& u_f, const Mat6& M_bar);

// ||I - M_a^{-1} M_bar||_2.
double contraction_norm(const Mat6& M_a, const Mat6& M_bar);

struct PerturbationDiagnostics {
  Mat6 M_a = Mat6::Zero();
  Mat6 C_a = Mat6::Zero();
  Vec6 psi = Vec6::Zero();
  Vec6 eta = Vec6::Zero();
  double contraction = 0.0;
  double m_inv_norm = 0.0;  // ||M_ho^{-1}||_2
  double lambda_min_Ma = 0.0;
  double decomposition_residual = 0.0;  // ||M_a eddot + C_a edot - u_m - psi|| rel
};

struct EstimatorState {
  Vec6 w = Vec6::Zero();
  Vec6 eta_hat = Vec6::Zero();
  double epsilon = 1.0;
  bool initialized = false;
  Vec6 s_prev = Vec6::Zero();
  Vec6 e_prev = Vec6::Zero();
};

// Estimator-form control u_m = M_bar(-eta_hat - K1 e - K2 edot) with
// w(0) = -edot(0); advances w with the same trapezoidal scheme as the PID
// integral, the edot component integrated exactly.
Vec6 estimator_controller(const Vec6& e, const Vec6& e_dot, EstimatorState& state,
                          const Mat6& M_bar, const Mat6& K1, const Mat6& K2, double dt);

// Raw filter update with an externally supplied u_m:
// wdot = -M_bar^{-1} u_m - (w + edot)/eps.
void estimator_step(EstimatorState& state, const Vec6& u_m, const Vec6& e_dot,
                    const Mat6& M_bar, double dt);

// Integral pre-charge that makes the PID path coincide with the estimator
// form from t = 0: -K1^{-1} (K2 e0 + edot0).
Vec6 matched_integral_state(const Mat6& K1, const Mat6& K2, const Vec6& e0, const Vec6& edot0);

struct LemmaReport {
  bool applicable = true;
  bool pass = false;
  double residual = 0.0;
  std::string detail;
};

// If xdot = 0 at a full-rank grasp, the reconstructed (qdot, xdot_o) vanish.
LemmaReport lemma2_check(const Eigen::Ref<const MatrixXd>& dxdq,
                         const Eigen::Ref<const MatrixXd>& J_h,
                         const Eigen::Ref<const MatrixXd>& G, const Vec6& xdot);

// At a converged equilibrium the finite-difference rate of psi along the
// logged flow stays below tol. Time-varying external wrenches make the check
// inapplicable (expected nonzero).
LemmaReport lemma4_check(const std::vector<double>& t, const std::vector<Vec6>& psi,
                         double e_norm, double edot_norm, double tol,
                         bool time_varying_disturbance);

struct PerformanceMetrics {
  Vec6 settling_time = Vec6::Zero();
  Eigen::Matrix<bool, 6, 1> settled = Eigen::Matrix<bool, 6, 1>::Constant(false);
  Vec6 overshoot = Vec6::Zero();  // fraction of the commanded change; peak |e| when unexcited
  Vec6 steady_state_error = Vec6::Zero();
  double exp_rate = 0.0;  // decay exponent of ||(e, edot)|| over its final decade
  double exp_fit_r2 = 0.0;
};

PerformanceMetrics performance_metrics(const std::vector<double>& t,
                                       const std::vector<Vec6>& e,
                                       const std::vector<Vec6>& e_dot,
                                       const Vec6& tolerance_band);

struct ExpFit {
  double rate = 0.0;  // positive decay exponent (1/s)
  double r2 = 0.0;
  double slope = 0.0;  // raw slope of ln||(e, edot)|| vs t
};

// Least-squares line through ln||(e, edot)|| over the final decade above
// max(final value, floor).
ExpFit exp_fit(const std::vector<double>& t, const std::vector<Vec6>& e,
               const std::vector<Vec6>& e_dot, double floor = 1e-12);

}  // namespace inhand::analysis
