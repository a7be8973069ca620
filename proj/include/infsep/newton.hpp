#pragma once
// Globalised Newton iteration for sparse nonlinear systems R(w) = 0.
//
// Each iteration freezes a positive row scale s (supplied by the assembler) and
// minimises the merit ||R / s||_2 along the Newton direction by backtracking.
// When backtracking fails the solver switches to implicit pseudo-transient
// continuation, (J + diag(s)/dt) dw = -R, growing dt by switched evolution
// relaxation until plain Newton steps are acceptable again.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>

namespace infsep {

struct NewtonOptions {
  int maxIterations = 200;
  double residualTol = 1e-10;  // on max |R_i / s_i|
  double stepTol = 1e-12;      // on max |dw| relative to max(1, |w|_inf)
  double stagnationTol = 1e-8; // accepted residual once the line search stalls
  int maxBacktracks = 20;
  double initialPseudoRate = 10.0;  // 1/dt when pseudo-time starts
};

struct NewtonReport {
  int iterations = 0;
  double residualNorm = 0;  // max |R_i / s_i| at exit
  bool converged = false;
  int pseudoSteps = 0;
};

// Fills r and the row scales; fills J when it is non-null.
using Assembler =
    std::function<void(const Eigen::VectorXd& w, Eigen::VectorXd& r, Eigen::VectorXd& scale, Eigen::SparseMatrix<double>* J)>;

NewtonReport newton_solve(const Assembler& assemble, Eigen::VectorXd& w, const NewtonOptions& opt);

}  // namespace infsep
