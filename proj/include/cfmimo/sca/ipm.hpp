// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: hybrid coherent/non-coherent cell-free massive MIMO downlink toolkit
// Copyright (C) 2026 The cfmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cfmimo/core/errors.hpp"
#include "cfmimo/sca/program.hpp"

namespace cfmimo::sca {

struct IpmOptions {
  double dual_tol = 1e-8;       // ||cost + sum lambda grad g||_inf
  double gap_tol = 1e-8;        // surrogate gap, relative to max(1, |objective|)
  // Looser pair accepted when no further progress is possible.
  double acceptable_dual_tol = 1e-6;
  double acceptable_gap_tol = 1e-6;
  int max_iterations = 200;
  double centering = 5.0;       // smallest allowed gap reduction per iteration is 1 / centering
  double initial_gap = 1.0;     // relative to max(1, |objective at start|)
  double backtrack = 0.8;       // step shrink factor while a trial point is infeasible
  // Checked after every accepted step; returning true stops with kEarlyStop.
  std::function<bool(const Eigen::VectorXd&)> early_stop;
};

enum class IpmStatus { kOptimal, kAcceptable, kIterationLimit, kEarlyStop, kNumericalFailure };

inline const char* status_name(IpmStatus s) {
  switch (s) {
    case IpmStatus::kOptimal: return "optimal";
    case IpmStatus::kAcceptable: return "acceptable";
    case IpmStatus::kIterationLimit: return "iteration_limit";
    case IpmStatus::kEarlyStop: return "early_stop";
    case IpmStatus::kNumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct IpmResult {
  IpmStatus status = IpmStatus::kNumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // constraints first, then nonnegativity bounds
  double objective = 0.0;
  double gap = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

// No point satisfies every constraint; `phase1_value` > 0 is the smallest
// achievable max_j g_j(x), with `multipliers` its dual certificate.
class InfeasibleError : public NumericalError {
 public:
  InfeasibleError(double phase1_value, Eigen::VectorXd multipliers)
      : NumericalError("convex program is infeasible (phase-I value " + std::to_string(phase1_value) + ")"),
        phase1_value_(phase1_value),
        multipliers_(std::move(multipliers)) {}
  [[nodiscard]] double phase1_value() const { return phase1_value_; }
  [[nodiscard]] const Eigen::VectorXd& multipliers() const { return multipliers_; }

 private:
  double phase1_value_;
  Eigen::VectorXd multipliers_;
};

namespace detail {

// g_j(x) for all inequalities (constraints, then bounds as -x_j).
inline bool evaluate_constraints(const ConvexProgram& p, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  const auto nc = static_cast<Eigen::Index>(p.constraints.size());
  g.resize(static_cast<Eigen::Index>(p.num_inequalities()));
  for (Eigen::Index j = 0; j < nc; ++j) {
    g(j) = p.constraints[static_cast<std::size_t>(j)].value(x);
    if (!(g(j) < 0.0)) return false;
  }
  for (std::size_t b = 0; b < p.nonnegative.size(); ++b) {
    const double v = -x(p.nonnegative[b]);
    g(nc + static_cast<Eigen::Index>(b)) = v;
    if (!(v < 0.0)) return false;
  }
  return true;
}

inline void evaluate_gradients(const ConvexProgram& p, const Eigen::VectorXd& x, std::vector<Eigen::VectorXd>& grads) {
  grads.resize(p.constraints.size());
  for (std::size_t j = 0; j < p.constraints.size(); ++j) p.constraints[j].gradient(x, grads[j]);
}

// cost + sum_j lambda_j grad g_j
inline Eigen::VectorXd dual_residual(const ConvexProgram& p, const std::vector<Eigen::VectorXd>& grads,
                                     const Eigen::VectorXd& lambda) {
  Eigen::VectorXd r = p.cost;
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    const auto& c = p.constraints[j];
    const double l = lambda(static_cast<Eigen::Index>(j));
    for (std::size_t a = 0; a < c.support.size(); ++a) r(c.support[a]) += l * grads[j](static_cast<Eigen::Index>(a));
  }
  const auto nc = static_cast<Eigen::Index>(p.constraints.size());
  for (std::size_t b = 0; b < p.nonnegative.size(); ++b)
    r(p.nonnegative[b]) -= lambda(nc + static_cast<Eigen::Index>(b));
  return r;
}

// Maximal stretches [first, last] of a support whose variable indices are consecutive.
struct Run {
  std::size_t first;
  std::size_t last;
};

inline std::vector<Run> contiguous_runs(const std::vector<Eigen::Index>& support) {
  std::vector<Run> out;
  for (std::size_t a = 0; a < support.size(); ++a) {
    if (!out.empty() && support[a] == support[out.back().last] + 1) out.back().last = a;
    else out.push_back({a, a});
  }
  return out;
}

// Factorizes the Newton matrix H (lower triangle stored) once per iteration
// and solves against several right-hand sides.
//
// When the program declares local groups, H is split as H0 + U U^T where the
// rank-one terms of affine rows spanning several groups go to U. H0 is then
// solved by eliminating every group through its own small Cholesky factor,
// leaving a dense Schur complement on the ungrouped variables, and U is
// folded in with the Woodbury identity. A residual check guards each solve;
// the dense factorization is the fallback.
class NewtonSolver {
 public:
  explicit NewtonSolver(const ConvexProgram& p) : n_(p.num_vars), low_rank_(p.constraints.size(), false) {
    if (p.local_groups.empty()) return;
    std::vector<int> group_of(static_cast<std::size_t>(n_), -1);
    for (std::size_t g = 0; g < p.local_groups.size(); ++g)
      for (auto v : p.local_groups[g]) {
        if (group_of[static_cast<std::size_t>(v)] != -1) return;
        group_of[static_cast<std::size_t>(v)] = static_cast<int>(g);
      }
    for (std::size_t j = 0; j < p.constraints.size(); ++j) {
      const auto& c = p.constraints[j];
      int seen = -1;
      bool multi = false;
      for (auto v : c.support) {
        const int g = group_of[static_cast<std::size_t>(v)];
        if (g < 0) continue;
        if (seen >= 0 && g != seen) multi = true;
        seen = g;
      }
      if (!multi) continue;
      if (c.kind != Constraint::Kind::kAffine) {
        low_rank_.assign(p.constraints.size(), false);
        return;
      }
      low_rank_[j] = true;
    }
    groups_ = p.local_groups;
    for (Eigen::Index v = 0; v < n_; ++v)
      if (group_of[static_cast<std::size_t>(v)] < 0) dense_.push_back(v);
    structured_ = true;
  }

  [[nodiscard]] bool low_rank(std::size_t j) const { return structured_ && low_rank_[j]; }

  void begin() { columns_.clear(); }

  // Registers the term w * a a^T of a low-rank row.
  void add_low_rank(const Constraint& c, double w, const Eigen::VectorXd& grad) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
    const double sw = std::sqrt(w);
    for (std::size_t a = 0; a < c.support.size(); ++a) u(c.support[a]) = sw * grad(static_cast<Eigen::Index>(a));
    columns_.push_back(std::move(u));
  }

  bool factorize(Eigen::MatrixXd& H) {
    H_ = &H;
    dense_ready_ = false;
    use_dense_ = !structured_ || !factor_structured();
    return !use_dense_ || factor_dense();
  }

  bool solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& dx) {
    if (!use_dense_) {
      if (solve_structured(rhs, dx)) return true;
      use_dense_ = true;
      if (!factor_dense()) return false;
    }
    dx = dense_llt_.solve(rhs);
    return dx.allFinite();
  }

 private:
  static double regularization(const Eigen::MatrixXd& H) {
    return 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  }

  static double sym(const Eigen::MatrixXd& H, Eigen::Index i, Eigen::Index j) { return i >= j ? H(i, j) : H(j, i); }

  bool factor_dense() {
    if (dense_ready_) return true;
    Eigen::MatrixXd& H = *H_;
    for (const auto& u : columns_) H.selfadjointView<Eigen::Lower>().rankUpdate(u, 1.0);
    columns_.clear();
    dense_llt_.compute(H);
    if (dense_llt_.info() != Eigen::Success) {
      H.diagonal().array() += regularization(H);
      dense_llt_.compute(H);
      if (dense_llt_.info() != Eigen::Success) return false;
    }
    dense_ready_ = true;
    return true;
  }

  bool factor_structured() {
    const Eigen::MatrixXd& H = *H_;
    const auto nd = static_cast<Eigen::Index>(dense_.size());
    std::size_t nl = 0;
    for (const auto& g : groups_) nl += g.size();
    G_.resize(nd, static_cast<Eigen::Index>(nl));
    local_llt_.resize(groups_.size());
    Eigen::Index col = 0;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      const auto ng = static_cast<Eigen::Index>(g.size());
      Eigen::MatrixXd Hg(ng, ng);
      for (Eigen::Index a = 0; a < ng; ++a)
        for (Eigen::Index b = 0; b < ng; ++b) Hg(a, b) = sym(H, g[static_cast<std::size_t>(a)], g[static_cast<std::size_t>(b)]);
      auto& llt = local_llt_[gi];
      llt.compute(Hg);
      if (llt.info() != Eigen::Success) {
        Hg.diagonal().array() += regularization(Hg);
        llt.compute(Hg);
        if (llt.info() != Eigen::Success) return false;
      }
      Eigen::MatrixXd Bt(ng, nd);
      for (Eigen::Index a = 0; a < ng; ++a)
        for (Eigen::Index i = 0; i < nd; ++i) Bt(a, i) = sym(H, g[static_cast<std::size_t>(a)], dense_[static_cast<std::size_t>(i)]);
      // G_g = B_g L_g^{-T}
      G_.middleCols(col, ng) = llt.matrixL().solve(Bt).transpose();
      col += ng;
    }
    Eigen::MatrixXd S(nd, nd);
    for (Eigen::Index i = 0; i < nd; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) S(i, j) = H(dense_[static_cast<std::size_t>(i)], dense_[static_cast<std::size_t>(j)]);
    if (nl > 0) S.selfadjointView<Eigen::Lower>().rankUpdate(G_, -1.0);
    schur_.compute(S);
    if (schur_.info() != Eigen::Success) {
      S.diagonal().array() += regularization(S);
      schur_.compute(S);
      if (schur_.info() != Eigen::Success) return false;
    }
    const auto r = static_cast<Eigen::Index>(columns_.size());
    U_.resize(n_, r);
    for (Eigen::Index j = 0; j < r; ++j) U_.col(j) = columns_[static_cast<std::size_t>(j)];
    if (r > 0) {
      Z_ = apply(U_);
      Eigen::MatrixXd K = U_.transpose() * Z_;
      K.diagonal().array() += 1.0;
      woodbury_.compute(K);
      if (woodbury_.info() != Eigen::Success) return false;
    }
    return true;
  }

  // V = H0^{-1} R, column by column.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& R) const {
    const auto nd = static_cast<Eigen::Index>(dense_.size());
    const auto nr = R.cols();
    Eigen::MatrixXd rd(nd, nr);
    for (Eigen::Index i = 0; i < nd; ++i) rd.row(i) = R.row(dense_[static_cast<std::size_t>(i)]);
    // W_g = L_g^{-1} R_g ; R_D -= G W
    Eigen::MatrixXd W(G_.cols(), nr);
    Eigen::Index col = 0;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      const auto ng = static_cast<Eigen::Index>(g.size());
      Eigen::MatrixXd rg(ng, nr);
      for (Eigen::Index a = 0; a < ng; ++a) rg.row(a) = R.row(g[static_cast<std::size_t>(a)]);
      W.middleRows(col, ng) = local_llt_[gi].matrixL().solve(rg);
      col += ng;
    }
    if (W.rows() > 0) rd.noalias() -= G_ * W;
    const Eigen::MatrixXd vd = schur_.solve(rd);
    // V_g = L_g^{-T} (W_g - G_g^T V_D)
    if (W.rows() > 0) W.noalias() -= G_.transpose() * vd;
    Eigen::MatrixXd V(n_, nr);
    for (Eigen::Index i = 0; i < nd; ++i) V.row(dense_[static_cast<std::size_t>(i)]) = vd.row(i);
    col = 0;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      const auto ng = static_cast<Eigen::Index>(g.size());
      const Eigen::MatrixXd vg = local_llt_[gi].matrixU().solve(W.middleRows(col, ng));
      for (Eigen::Index a = 0; a < ng; ++a) V.row(g[static_cast<std::size_t>(a)]) = vg.row(a);
      col += ng;
    }
    return V;
  }

  bool solve_structured(const Eigen::VectorXd& rhs, Eigen::VectorXd& dx) {
    const Eigen::MatrixXd& H = *H_;
    const auto r = U_.cols();
    auto full_solve = [&](const Eigen::VectorXd& b) {
      Eigen::VectorXd v = apply(b);
      if (r > 0) v.noalias() -= Z_ * woodbury_.solve(U_.transpose() * v);
      return v;
    };
    auto residual = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd res = rhs - H.selfadjointView<Eigen::Lower>() * v;
      if (r > 0) res.noalias() -= U_ * (U_.transpose() * v);
      return res;
    };
    const double tol = 1e-10 * std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
    dx = full_solve(rhs);
    Eigen::VectorXd res = residual(dx);
    for (int k = 0; k < 2 && res.lpNorm<Eigen::Infinity>() > tol; ++k) {
      dx += full_solve(res);
      res = residual(dx);
    }
    return dx.allFinite() && res.lpNorm<Eigen::Infinity>() <= 1e3 * tol;
  }

  Eigen::Index n_;
  std::vector<bool> low_rank_;
  std::vector<std::vector<Eigen::Index>> groups_;
  std::vector<Eigen::Index> dense_;
  bool structured_ = false;
  bool use_dense_ = true;
  bool dense_ready_ = false;
  Eigen::MatrixXd* H_ = nullptr;
  std::vector<Eigen::VectorXd> columns_;
  Eigen::MatrixXd G_, U_, Z_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> local_llt_;
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> schur_;
  Eigen::LLT<Eigen::MatrixXd> woodbury_;
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> dense_llt_;
};

}  // namespace detail

// Primal-dual interior-point method (Mehrotra predictor-corrector) for
// smooth convex inequality programs with a strictly feasible starting point.
// Iterates stay strictly feasible.
inline IpmResult solve_interior_point(const ConvexProgram& p, const Eigen::VectorXd& x0, const IpmOptions& opt = {}) {
  const Eigen::Index n = p.num_vars;
  const auto nc = static_cast<Eigen::Index>(p.constraints.size());
  const auto m = static_cast<Eigen::Index>(p.num_inequalities());
  IpmResult res;
  res.x = x0;
  Eigen::VectorXd g;
  if (!detail::evaluate_constraints(p, res.x, g))
    throw NumericalError("interior-point start is not strictly feasible");
  res.objective = p.cost.dot(res.x);
  if (m == 0) {
    if (p.cost.lpNorm<Eigen::Infinity>() > 0.0) throw NumericalError("unconstrained linear program is unbounded");
    res.status = IpmStatus::kOptimal;
    return res;
  }

  const double nu = opt.initial_gap * std::max(1.0, std::abs(res.objective)) / static_cast<double>(m);
  res.lambda = (nu / (-g.array())).matrix();
  std::vector<Eigen::VectorXd> grads;
  detail::evaluate_gradients(p, res.x, grads);

  detail::NewtonSolver newton(p);
  std::vector<std::vector<detail::Run>> runs(p.constraints.size());
  for (std::size_t j = 0; j < p.constraints.size(); ++j) runs[j] = detail::contiguous_runs(p.constraints[j].support);

  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd rhs(n), dx(n), dx_aff(n), dlambda(m), dl_aff(m), gdx(m), gdx_aff(m), target(m);
  Eigen::VectorXd x_new(n), lambda_new(m), g_new(m);
  std::vector<Eigen::VectorXd> grads_new;

  // Newton direction for the complementarity targets lambda_j * (-g_j) = target_j.
  auto direction = [&](const Eigen::VectorXd& tgt, Eigen::VectorXd& step_x, Eigen::VectorXd& step_l,
                       Eigen::VectorXd& gd) {
    rhs = -p.cost;
    for (Eigen::Index j = 0; j < nc; ++j) {
      const auto& c = p.constraints[static_cast<std::size_t>(j)];
      const auto& gr = grads[static_cast<std::size_t>(j)];
      const double f = tgt(j) / -g(j);
      for (std::size_t a = 0; a < c.support.size(); ++a) rhs(c.support[a]) -= f * gr(static_cast<Eigen::Index>(a));
    }
    for (std::size_t b = 0; b < p.nonnegative.size(); ++b) {
      const auto j = nc + static_cast<Eigen::Index>(b);
      rhs(p.nonnegative[b]) += tgt(j) / -g(j);
    }
    if (!newton.solve(rhs, step_x)) return false;
    for (Eigen::Index j = 0; j < nc; ++j) {
      const auto& c = p.constraints[static_cast<std::size_t>(j)];
      const auto& gr = grads[static_cast<std::size_t>(j)];
      double v = 0.0;
      for (std::size_t a = 0; a < c.support.size(); ++a) v += gr(static_cast<Eigen::Index>(a)) * step_x(c.support[a]);
      gd(j) = v;
    }
    for (std::size_t b = 0; b < p.nonnegative.size(); ++b) gd(nc + static_cast<Eigen::Index>(b)) = -step_x(p.nonnegative[b]);
    const Eigen::ArrayXd d = -g.array();
    step_l = ((tgt.array() - res.lambda.array() * d + res.lambda.array() * gd.array()) / d).matrix();
    return step_x.allFinite() && step_l.allFinite();
  };

  // Largest step in [0, 1] keeping lambda and the linearized slack nonnegative.
  auto max_step = [&](const Eigen::VectorXd& dl, const Eigen::VectorXd& gd) {
    double a = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (dl(j) < 0.0) a = std::min(a, -res.lambda(j) / dl(j));
      if (gd(j) > 0.0) a = std::min(a, -g(j) / gd(j));
    }
    return a;
  };

  auto stalled = [&]() {
    const bool ok = res.dual_residual <= opt.acceptable_dual_tol &&
                    res.gap <= opt.acceptable_gap_tol * std::max(1.0, std::abs(res.objective));
    res.status = ok ? IpmStatus::kAcceptable : IpmStatus::kNumericalFailure;
    return res;
  };

  double last_step = 1.0;
  for (int it = 0;; ++it) {
    res.iterations = it;
    const double gap = -g.dot(res.lambda);
    const Eigen::VectorXd rd = detail::dual_residual(p, grads, res.lambda);
    res.gap = gap;
    res.dual_residual = rd.lpNorm<Eigen::Infinity>();
    res.objective = p.cost.dot(res.x);
    if (res.dual_residual <= opt.dual_tol && gap <= opt.gap_tol * std::max(1.0, std::abs(res.objective))) {
      res.status = IpmStatus::kOptimal;
      return res;
    }
    if (it >= opt.max_iterations) {
      res.status = IpmStatus::kIterationLimit;
      return res;
    }

    H.setZero();
    newton.begin();
    for (Eigen::Index j = 0; j < nc; ++j) {
      const auto& c = p.constraints[static_cast<std::size_t>(j)];
      const auto& gr = grads[static_cast<std::size_t>(j)];
      const double l = res.lambda(j);
      if (c.kind != Constraint::Kind::kAffine) c.add_hessian(res.x, l, H);
      const double w = l / -g(j);
      if (newton.low_rank(static_cast<std::size_t>(j))) {
        newton.add_low_rank(c, w, gr);
        continue;
      }
      // Lower triangle of w * gr gr^T, one contiguous column piece per run.
      const auto& rs = runs[static_cast<std::size_t>(j)];
      for (std::size_t b = 0; b < c.support.size(); ++b) {
        const double wb = w * gr(static_cast<Eigen::Index>(b));
        if (wb == 0.0) continue;
        auto column = H.col(c.support[b]);
        for (const auto& run : rs) {
          if (run.last < b) continue;
          const std::size_t first = std::max(run.first, b);
          const auto len = static_cast<Eigen::Index>(run.last - first + 1);
          column.segment(c.support[first], len) += wb * gr.segment(static_cast<Eigen::Index>(first), len);
        }
      }
    }
    for (std::size_t b = 0; b < p.nonnegative.size(); ++b) {
      const auto j = nc + static_cast<Eigen::Index>(b);
      const auto v = p.nonnegative[b];
      H(v, v) += res.lambda(j) / -g(j);
    }
    if (!newton.factorize(H)) {
      return stalled();
    }

    // Predictor.
    target.setZero();
    if (!direction(target, dx_aff, dl_aff, gdx_aff)) {
      return stalled();
    }
    const double a_aff = max_step(dl_aff, gdx_aff);
    const double gap_aff =
        ((res.lambda + a_aff * dl_aff).array() * (-g - a_aff * gdx_aff).array()).sum();
    // Short previous steps signal curvature the linear model misses; center more.
    const double floor = last_step >= 0.9   ? 1.0 / opt.centering
                         : last_step <= 0.2 ? 1.0
                                            : std::pow(opt.centering, -(last_step - 0.2) / 0.7);
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), floor, 1.0);
    const double mu = sigma * gap / static_cast<double>(m);

    // Corrector.
    target = (mu + dl_aff.array() * gdx_aff.array()).matrix();
    if (!direction(target, dx, dlambda, gdx)) {
      return stalled();
    }

    double step = 1.0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (dlambda(j) < 0.0) step = std::min(step, -res.lambda(j) / dlambda(j));
    step = std::min(1.0, 0.99 * step);
    bool accepted = false;
    while (step > 1e-14) {
      x_new = res.x + step * dx;
      lambda_new = res.lambda + step * dlambda;
      if (detail::evaluate_constraints(p, x_new, g_new)) {
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      return stalled();
    }
    last_step = step;
    detail::evaluate_gradients(p, x_new, grads_new);
    res.x.swap(x_new);
    res.lambda.swap(lambda_new);
    g.swap(g_new);
    grads.swap(grads_new);
    if (opt.early_stop && opt.early_stop(res.x)) {
      res.objective = p.cost.dot(res.x);
      res.gap = -g.dot(res.lambda);
      res.iterations = it + 1;
      res.status = IpmStatus::kEarlyStop;
      return res;
    }
  }
}

// Finds a strictly feasible point by minimizing s subject to g_j(x) <= s.
// Throws InfeasibleError when the minimum is nonnegative.
inline Eigen::VectorXd find_strictly_feasible(const ConvexProgram& p, const Eigen::VectorXd& x0,
                                              const IpmOptions& opt = {}) {
  const Eigen::Index n = p.num_vars;
  ConvexProgram aux;
  aux.num_vars = n + 1;
  aux.cost = Eigen::VectorXd::Zero(n + 1);
  aux.cost(n) = 1.0;
  aux.local_groups = p.local_groups;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : p.constraints) {
    Constraint a = c;
    a.support.push_back(n);
    a.linear.conservativeResize(a.linear.size() + 1);
    a.linear(a.linear.size() - 1) = -1.0;
    aux.constraints.push_back(std::move(a));
    const double v = c.value(x0);
    if (!std::isfinite(v)) throw NumericalError("phase I start lies outside a constraint domain");
    worst = std::max(worst, v);
  }
  for (auto j : p.nonnegative) {
    Constraint a;
    a.family = Family::kBound;
    a.support = {j, n};
    a.linear = Eigen::Vector2d(-1.0, -1.0);
    aux.constraints.push_back(std::move(a));
    worst = std::max(worst, -x0(j));
  }
  Eigen::VectorXd z(n + 1);
  z.head(n) = x0;
  z(n) = worst + 1.0;
  IpmOptions o = opt;
  const double margin = 1e-9;
  o.early_stop = [n, margin](const Eigen::VectorXd& v) { return v(n) < -margin; };
  const auto r = solve_interior_point(aux, z, o);
  if (r.x(n) < 0.0) return r.x.head(n);
  if (r.status == IpmStatus::kOptimal) throw InfeasibleError(r.x(n), r.lambda);
  throw NumericalError(std::string("phase I did not converge: ") + status_name(r.status));
}

// Runs phase I when the program's start is not strictly feasible.
inline IpmResult solve_program(const ConvexProgram& p, const IpmOptions& opt = {}) {
  Eigen::VectorXd g;
  Eigen::VectorXd x = p.start;
  if (!detail::evaluate_constraints(p, x, g)) x = find_strictly_feasible(p, x, opt);
  return solve_interior_point(p, x, opt);
}

}  // namespace cfmimo::sca
