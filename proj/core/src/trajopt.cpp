#include "ridebot/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ridebot/dynamics.hpp"
#include "ridebot/phri.hpp"

namespace ridebot {

void BrakingProblem::validate() const {
  if (segments < 10) throw std::invalid_argument("braking problem needs at least 10 segments");
  if (!(v0 >= 0.0)) throw std::invalid_argument("initial speed must be >= 0");
  weights.validate();
  const BrakingBounds& b = bounds;
  if (!(b.zeta_max > 0.0) || !(b.theta_max > 0.0) || !(b.tau_R_max >= 0.0) ||
      !(b.tau_max > 0.0) || !(b.t_F_min > 0.0) || !(b.t_F_max >= b.t_F_min)) {
    throw std::invalid_argument("braking bounds must be positive with t_F_min <= t_F_max");
  }
  scheme.validate();
  if (scheme.has_integral()) {
    throw std::invalid_argument("scheme " + scheme.name() +
                                " integrates the interaction moment and cannot be "
                                "transcribed; use baseline, hics1, hics2 or hacs1");
  }
}

namespace {

template <typename S>
Vec6<S> knot_state(std::span<const S> in, std::size_t offset) {
  Vec6<S> s;
  for (int i = 0; i < 6; ++i) s[i] = in[offset + static_cast<std::size_t>(i)];
  return s;
}

}  // namespace

NLPInstance transcribe(const BrakingProblem& prob, const RiderBallbotParams& p,
                       const Gains& g) {
  prob.validate();
  p.validate();

  NLPInstance inst;
  inst.problem = prob;
  inst.params = p;
  inst.gains = g;
  inst.layout.segments = prob.segments;
  EquilibriumLimits limits;
  limits.tau_R_max = prob.bounds.tau_R_max;
  inst.initial = find_equilibrium(prob.scheme, g, p, prob.v0, limits);

  const DecisionLayout L = inst.layout;
  const int N = prob.segments;
  const int n = L.size();
  inst.defect_constraints = 6 * N;
  inst.boundary_constraints = 7 + 4;
  inst.control_tie_constraints = 0;
  const int m_eq = inst.defect_constraints + inst.boundary_constraints;
  const int m_in = 2 * L.knots();
  ElementNlp nlp(n, m_eq, m_in);

  const ControlScheme sch = prob.scheme;
  const double tau_max = prob.bounds.tau_max;

  // collocation defects
  for (int k = 0; k < N; ++k) {
    std::vector<int> vars;
    for (int f = 0; f < DecisionLayout::kStride; ++f) vars.push_back(L.index(k, f));
    for (int f = 0; f < DecisionLayout::kStride; ++f) vars.push_back(L.index(k + 1, f));
    vars.push_back(L.final_time());
    nlp.add(make_element(
        ElementKind::kEquality, std::move(vars), 6 * k, 6,
        [p, g, sch, N](auto in, auto out) {
          using S = typename decltype(in)::element_type;
          using T = std::remove_const_t<S>;
          const Vec6<T> sa = knot_state<T>(in, 0);
          const Vec6<T> sb = knot_state<T>(in, 7);
          const T& ua = in[6];
          const T& ub = in[13];
          const T h = in[14] / static_cast<double>(N);
          const T taua = stateless_control_torque<T>(sa, ua, sch, g);
          const T taub = stateless_control_torque<T>(sb, ub, sch, g);
          const Vec6<T> fa = kernel::state_derivative<T>(sa, ua, taua, p);
          const Vec6<T> fb = kernel::state_derivative<T>(sb, ub, taub, p);
          for (int i = 0; i < 6; ++i) out[i] = sb[i] - sa[i] - 0.5 * h * (fa[i] + fb[i]);
        }));
  }

  // boundary: pinned steady cruise at t0, stopped and upright chassis at tF
  const PlanarState::Vector s_eq = inst.initial.state.to_vector();
  const double hold = inst.initial.tau_R_hold;
  {
    std::vector<int> vars;
    for (int f = 0; f < DecisionLayout::kStride; ++f) vars.push_back(L.index(0, f));
    nlp.add(make_element(ElementKind::kEquality, std::move(vars), 6 * N, 7,
                         [s_eq, hold](auto in, auto out) {
                           for (int i = 0; i < 6; ++i) out[i] = in[i] - s_eq[i];
                           out[6] = in[6] - hold;
                         }));
  }
  nlp.add(make_element(ElementKind::kEquality,
                       {L.index(N, kTheta), L.index(N, kZetaDot), L.index(N, kThetaDot),
                        L.index(N, kPhiDot)},
                       6 * N + 7, 4, [](auto in, auto out) {
                         for (int i = 0; i < 4; ++i) out[i] = in[i];
                       }));

  // drivetrain torque limit at every knot
  for (int k = 0; k <= N; ++k) {
    std::vector<int> vars;
    for (int f = 0; f < DecisionLayout::kStride; ++f) vars.push_back(L.index(k, f));
    nlp.add(make_element(ElementKind::kInequality, std::move(vars), 2 * k, 2,
                         [g, sch, tau_max](auto in, auto out) {
                           using S = typename decltype(in)::element_type;
                           using T = std::remove_const_t<S>;
                           const T tau = stateless_control_torque<T>(knot_state<T>(in, 0),
                                                                     in[6], sch, g);
                           out[0] = tau - tau_max;
                           out[1] = -tau - tau_max;
                         }));
  }

  // trapezoidal quadrature of the braking effort
  const auto [Q, R] = braking_weights(prob.weights);
  const Eigen::Matrix<double, 6, 1> q_diag = Q.diagonal();
  const double r_tau_R = R(0, 0);
  for (int k = 0; k <= N; ++k) {
    std::vector<int> vars;
    for (int f = 0; f < DecisionLayout::kStride; ++f) vars.push_back(L.index(k, f));
    vars.push_back(L.final_time());
    const double w = (k == 0 || k == N) ? 0.5 : 1.0;
    nlp.add(make_element(ElementKind::kObjective, std::move(vars), 0, 1,
                         [q_diag, r_tau_R, s_eq, w, N](auto in, auto out) {
                           using S = typename decltype(in)::element_type;
                           using T = std::remove_const_t<S>;
                           T run = r_tau_R * in[6] * in[6];
                           for (int i = 0; i < 6; ++i) {
                             if (q_diag[i] == 0.0) continue;
                             const T d = in[i] - s_eq[i];
                             run += q_diag[i] * d * d;
                           }
                           out[0] = w * (in[7] / static_cast<double>(N)) * run;
                         }));
  }

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lb = Eigen::VectorXd::Constant(n, -inf);
  Eigen::VectorXd ub = Eigen::VectorXd::Constant(n, inf);
  for (int k = 0; k <= N; ++k) {
    lb[L.index(k, kZeta)] = -prob.bounds.zeta_max;
    ub[L.index(k, kZeta)] = prob.bounds.zeta_max;
    lb[L.index(k, kTheta)] = -prob.bounds.theta_max;
    ub[L.index(k, kTheta)] = prob.bounds.theta_max;
    lb[L.index(k, DecisionLayout::kTauR)] = -prob.bounds.tau_R_max;
    ub[L.index(k, DecisionLayout::kTauR)] = prob.bounds.tau_R_max;
  }
  lb[L.final_time()] = prob.bounds.t_F_min;
  ub[L.final_time()] = prob.bounds.t_F_max;
  nlp.set_bounds(lb, ub);

  inst.nlp = std::move(nlp);
  return inst;
}

Eigen::VectorXd NLPInstance::initial_guess(double t_F_guess) const {
  const DecisionLayout& L = layout;
  const int N = L.segments;
  const double tF = std::clamp(t_F_guess, problem.bounds.t_F_min, problem.bounds.t_F_max);
  const PlanarState& s0 = initial.state;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(L.size());
  for (int k = 0; k <= N; ++k) {
    const double a = static_cast<double>(k) / N;  // normalised time
    const double t = a * tF;
    x[L.index(k, kZeta)] = (1.0 - a) * s0.zeta;
    x[L.index(k, kTheta)] = (1.0 - a) * s0.theta;
    x[L.index(k, kPhi)] = s0.phi + s0.phi_dot * (t - 0.5 * t * t / tF);
    x[L.index(k, kZetaDot)] = 0.0;
    x[L.index(k, kThetaDot)] = 0.0;
    x[L.index(k, kPhiDot)] = (1.0 - a) * s0.phi_dot;
    x[L.index(k, DecisionLayout::kTauR)] = (1.0 - a) * initial.tau_R_hold;
  }
  x[L.final_time()] = tF;
  return x;
}

double NLPInstance::knot_drive_torque(const Eigen::VectorXd& x, int knot,
                                      double* phi_dot_c) const {
  const Vec6<double> s = x.segment<6>(layout.index(knot, 0));
  const double tau_R = x[layout.index(knot, DecisionLayout::kTauR)];
  return stateless_control_torque<double>(s, tau_R, problem.scheme, gains, phi_dot_c);
}

Trajectory NLPInstance::knot_trajectory(const Eigen::VectorXd& x) const {
  const int N = layout.segments;
  const double tF = x[layout.final_time()];
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) {
    double phi_dot_c = 0.0;
    const double tau = knot_drive_torque(x, k, &phi_dot_c);
    const double tau_R = x[layout.index(k, DecisionLayout::kTauR)];
    traj.push_back(tF * k / N, PlanarState::from_vector(x.segment<6>(layout.index(k, 0))),
                   {tau_R, tau}, seat_pitch_moment(tau_R), phi_dot_c,
                   std::abs(tau) > problem.bounds.tau_max);
  }
  return traj;
}

Trajectory NLPInstance::resample(const Eigen::VectorXd& x, double max_dt) const {
  const int N = layout.segments;
  const double tF = x[layout.final_time()];
  const double h = tF / N;

  std::vector<PlanarState::Vector> s(N + 1), f(N + 1);
  std::vector<double> u(N + 1);
  for (int k = 0; k <= N; ++k) {
    s[k] = x.segment<6>(layout.index(k, 0));
    u[k] = x[layout.index(k, DecisionLayout::kTauR)];
    f[k] = state_derivative(s[k], {u[k], knot_drive_torque(x, k)}, params);
  }

  const int samples = std::max(N, static_cast<int>(std::ceil(tF / max_dt)));
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(samples + 1));
  for (int i = 0; i <= samples; ++i) {
    const double t = (i == samples) ? tF : tF * i / samples;
    const int k = std::min(N - 1, static_cast<int>(std::floor(t / h)));
    const double tau = t - k * h;
    const double w = tau / h;
    // x(t) = x_k + f_k tau + (tau^2 / 2h)(f_{k+1} - f_k)
    PlanarState::Vector si = s[k] + f[k] * tau + (tau * tau / (2.0 * h)) * (f[k + 1] - f[k]);
    if (i == samples) si = s[N];
    const double tau_R = (1.0 - w) * u[k] + w * u[k + 1];
    double phi_dot_c = 0.0;
    const double drive =
        stateless_control_torque<double>(si, tau_R, problem.scheme, gains, &phi_dot_c);
    traj.push_back(t, PlanarState::from_vector(si), {tau_R, drive}, seat_pitch_moment(tau_R),
                   phi_dot_c, std::abs(drive) > problem.bounds.tau_max);
  }
  return traj;
}

double NLPInstance::max_defect(const Eigen::VectorXd& x) const {
  const int N = layout.segments;
  const double h = x[layout.final_time()] / N;
  double worst = 0.0;
  PlanarState::Vector prev_s = x.segment<6>(layout.index(0, 0));
  PlanarState::Vector prev_f = state_derivative(
      prev_s, {x[layout.index(0, DecisionLayout::kTauR)], knot_drive_torque(x, 0)}, params);
  for (int k = 1; k <= N; ++k) {
    const PlanarState::Vector sk = x.segment<6>(layout.index(k, 0));
    const PlanarState::Vector fk = state_derivative(
        sk, {x[layout.index(k, DecisionLayout::kTauR)], knot_drive_torque(x, k)}, params);
    const PlanarState::Vector d = sk - prev_s - 0.5 * h * (prev_f + fk);
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
    prev_s = sk;
    prev_f = fk;
  }
  return worst;
}

double NLPInstance::max_box_violation(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd& lb = nlp.lower_bounds();
  const Eigen::VectorXd& ub = nlp.upper_bounds();
  double v = std::max((lb - x).maxCoeff(), (x - ub).maxCoeff());
  for (int k = 0; k <= layout.segments; ++k) {
    v = std::max(v, std::abs(knot_drive_torque(x, k)) - problem.bounds.tau_max);
  }
  return std::max(v, 0.0);
}

OptimalSolution solve_nlp(const NLPInstance& inst, const std::optional<Eigen::VectorXd>& init,
                          const SolverOptions& opt, const std::optional<DualWarmStart>& duals) {
  Eigen::VectorXd x0 = init.value_or(inst.initial_guess());
  if (x0.size() != inst.layout.size()) {
    throw std::invalid_argument("initial trajectory has the wrong dimension");
  }
  // the pinned first knot always comes from this instance's equilibrium
  x0.segment<6>(inst.layout.index(0, 0)) = inst.initial.state.to_vector();
  x0[inst.layout.index(0, DecisionLayout::kTauR)] = inst.initial.tau_R_hold;

  const SolverResult r = solve_augmented_lagrangian(inst.nlp, x0, opt, duals);

  OptimalSolution sol;
  sol.x = r.x;
  sol.J_star = r.objective;
  sol.t_F = r.x[inst.layout.final_time()];
  sol.iterations = r.inner_iterations;
  sol.outer_iterations = r.outer_iterations;
  sol.kkt_residual = r.kkt_residual;
  sol.max_defect = inst.max_defect(r.x);
  sol.converged = r.converged && sol.max_defect < 1e-6 && inst.max_box_violation(r.x) < 1e-8;
  sol.message = r.message;
  if (r.converged && !sol.converged) sol.message = "solver converged but re-check failed";
  sol.duals = DualWarmStart{r.y_eq, r.y_in, r.penalty};
  sol.knots = inst.knot_trajectory(r.x);
  sol.trajectory = inst.resample(r.x);
  return sol;
}

Eigen::VectorXd transfer_solution(const NLPInstance& from, const Eigen::VectorXd& x,
                                  const NLPInstance& to) {
  if (x.size() != from.layout.size()) {
    throw std::invalid_argument("decision vector does not match the source grid");
  }
  const int n_from = from.layout.segments;
  const int n_to = to.layout.segments;
  Eigen::VectorXd y(to.layout.size());
  for (int k = 0; k <= n_to; ++k) {
    const double a = static_cast<double>(k) * n_from / n_to;
    const int i = std::min(static_cast<int>(a), n_from - 1);
    const double w = a - i;
    for (int f = 0; f < DecisionLayout::kStride; ++f) {
      y[to.layout.index(k, f)] = (1.0 - w) * x[from.layout.index(i, f)] +
                                 w * x[from.layout.index(i + 1, f)];
    }
  }
  y[to.layout.final_time()] = x[from.layout.final_time()];
  return y;
}

ReplayCheck replay_solution(const NLPInstance& inst, const OptimalSolution& sol, double dt,
                            double tail) {
  std::vector<double> t(sol.knots.t);
  std::vector<double> u;
  u.reserve(sol.knots.size());
  for (const auto& in : sol.knots.inputs) u.push_back(in.tau_R);

  SimOptions so;
  so.dt = dt;
  so.t_end = sol.t_F + tail;
  so.tau_max = std::numeric_limits<double>::infinity();
  so.theta_limit = inst.problem.bounds.theta_max + 0.2;

  ReplayCheck rc;
  rc.sim = simulate(inst.initial.state, tabulated_rider(std::move(t), std::move(u)),
                    inst.problem.scheme, inst.gains, inst.params, so);
  const Trajectory& tr = rc.sim.trajectory;
  const auto end_it = std::lower_bound(tr.t.begin(), tr.t.end(), sol.t_F - 0.5 * dt);
  const std::size_t last =
      std::min(tr.size() - 1, static_cast<std::size_t>(end_it - tr.t.begin()));
  const auto [Q, R] = braking_weights(inst.problem.weights);
  rc.J_replay = braking_effort(tr, Q, R, 0, last);
  rc.final_speed = std::abs(tr.states[last].phi_dot) * inst.params.r_s;
  return rc;
}

}  // namespace ridebot
