#pragma once

// Reference implementations used only by tests. None of them calls into the
// library's numerical code, so agreement is a genuine cross-check.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

// E f(mean + sd Z) by the trapezoid rule on z in [-half_width, half_width].
double gaussian_trapezoid(const Fn& f, double mean, double sd, int points = 20001, double half_width = 12.0);

// Plain bisection for a sign change of f on [lo, hi].
double bisect(const Fn& f, double lo, double hi, double tol = 1e-14, int max_iter = 200);

// Fixed point q = E tanh^2(h + beta sqrt(q) Z) by bisection with trapezoid expectations.
double rs_q(double beta, double h, int points = 20001);

// Cyclic Jacobi rotations; eigenvalues sorted descending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, double tol = 1e-14, int max_sweeps = 100);

// Direct double loop over i < j.
double tap_direct(const Eigen::MatrixXd& gbar, const Eigen::VectorXd& m, double beta, double h);

// Central differences of f at x.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double step);
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                           double step);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// E tanh(h + b sqrt(t) Z + b sqrt(q-t) Z') tanh(h + b sqrt(t) Z + b sqrt(q-t) Z'') by sampling.
McEstimate psi_monte_carlo(double t, double beta, double h, double q, std::int64_t samples, std::uint64_t seed);

// Symmetric GOE-like matrix with N(0,1) off-diagonal and N(0,2) diagonal from std::mt19937_64.
Eigen::MatrixXd goe(int n, std::uint64_t seed);

}  // namespace oracle
