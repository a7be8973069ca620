#include "infsep/newton.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace infsep {
namespace {

double scaled_max(const Eigen::VectorXd& r, const Eigen::VectorXd& s) { return (r.array() / s.array()).abs().maxCoeff(); }

double merit(const Eigen::VectorXd& r, const Eigen::VectorXd& s) { return (r.array() / s.array()).matrix().norm(); }

bool solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return false;
  x = lu.solve(b);
  return lu.info() == Eigen::Success && x.allFinite();
}

}  // namespace

NewtonReport newton_solve(const Assembler& assemble, Eigen::VectorXd& w, const NewtonOptions& opt) {
  const Eigen::Index n = w.size();
  Eigen::VectorXd r(n), s(n), rt(n), st(n), dw(n);
  Eigen::SparseMatrix<double> J(n, n);
  NewtonReport rep;
  double pseudoRate = 0;  // 1/dt; zero means plain Newton

  assemble(w, r, s, &J);
  for (rep.iterations = 0; rep.iterations < opt.maxIterations; ++rep.iterations) {
    rep.residualNorm = scaled_max(r, s);
    if (!std::isfinite(rep.residualNorm)) break;
    if (rep.residualNorm <= opt.residualTol) {
      rep.converged = true;
      return rep;
    }
    const double m0 = merit(r, s);

    Eigen::SparseMatrix<double> A = J;
    if (pseudoRate > 0) {
      for (Eigen::Index i = 0; i < n; ++i) A.coeffRef(i, i) += pseudoRate * s(i);
    }
    if (!solve_linear(A, -r, dw)) {
      pseudoRate = pseudoRate > 0 ? pseudoRate * 10 : opt.initialPseudoRate;
      continue;
    }

    if (pseudoRate > 0) {
      // Pseudo-time step: accept unless the merit blows up; adapt dt.
      Eigen::VectorXd trial = w + dw;
      assemble(trial, rt, st, nullptr);
      const double m1 = merit(rt, s);
      if (!std::isfinite(m1) || m1 > 2 * m0) {
        pseudoRate *= 10;
        continue;
      }
      ++rep.pseudoSteps;
      w = trial;
      pseudoRate *= std::clamp(m1 / m0, 0.1, 2.0);
      if (pseudoRate < 1e-8) pseudoRate = 0;
      assemble(w, r, s, &J);
      continue;
    }

    const double wScale = std::max(1.0, w.lpNorm<Eigen::Infinity>());
    double t = 1;
    bool accepted = false;
    for (int k = 0; k <= opt.maxBacktracks; ++k, t /= 2) {
      Eigen::VectorXd trial = w + t * dw;
      assemble(trial, rt, st, nullptr);
      const double m1 = merit(rt, s);
      if (std::isfinite(m1) && m1 <= (1 - 1e-4 * t) * m0) {
        w = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent left: either roundoff has been reached or the iteration
      // needs globalising.
      if (rep.residualNorm <= opt.stagnationTol) {
        rep.converged = true;
        return rep;
      }
      if (dw.lpNorm<Eigen::Infinity>() <= opt.stepTol * wScale) {
        rep.converged = rep.residualNorm <= std::sqrt(opt.residualTol);
        return rep;
      }
      pseudoRate = opt.initialPseudoRate;
      continue;
    }
    assemble(w, r, s, &J);
    if (t == 1 && dw.lpNorm<Eigen::Infinity>() <= opt.stepTol * wScale) {
      rep.residualNorm = scaled_max(r, s);
      rep.converged = true;
      ++rep.iterations;
      return rep;
    }
  }
  rep.residualNorm = scaled_max(r, s);
  rep.converged = rep.residualNorm <= opt.residualTol;
  return rep;
}

}  // namespace infsep
