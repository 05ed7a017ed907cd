#pragma once

// Adaptive regularized proximal quasi-Newton driver.
//
// Each outer iteration builds the diagonal LBFGS metric once, then solves
// the regularized subproblem, backtracks along the retraction and compares
// actual to predicted decrease. Poor agreement (rho < eta1) multiplies the
// regularization sigma by gamma2 and re-solves; very good agreement
// (rho >= eta2) shrinks it by gamma1 after accepting the step.

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arpqn/metric.hpp"
#include "arpqn/problems.hpp"
#include "arpqn/stiefel.hpp"

namespace arpqn {

enum class Mode {
  Arpqn,       // monotone line search
  NlsArpqn,    // nonmonotone line search over a window of window_m + 1 values
  PgBaseline,  // constant metric L I, sigma = 0, monotone, no rho/sigma control
};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);  // "arpqn", "nls", "pg"

struct SolverConfig {
  double sigma0 = 1.0;
  // Floor for the shrink branch. From far below the metric scale,
  // max_inner_sigma escalations by gamma2 could not change the direction.
  double sigma_min = 1e-8;
  double eta1 = 0.2;
  double eta2 = 0.9;
  double gamma1 = 0.3;
  double gamma2 = 3.0;
  double ls_sigma = 1e-4;
  double ls_gamma = 0.5;
  int window_m = 5;
  int memory_p = 5;
  double theta_floor = 1e-3;
  // Curvature pairs with cos(s, y) below this leave the metric unchanged.
  double curvature_cos_min = 1e-2;
  double tol_factor = 1e-8;
  // Stop on max(||V||^2, ||V||_B^2) instead of ||V||^2 alone, so the test
  // does not loosen as the metric grows with n.
  bool stop_in_metric = true;
  long max_outer = 70000;
  int max_ssn = 100;
  int max_inner_sigma = 30;
  RetractionKind retraction = RetractionKind::Svd;
  Mode mode = Mode::NlsArpqn;

  // Throws std::invalid_argument when a parameter range is violated.
  void validate() const;

  // Sets a field from its textual "key=value" form. Throws
  // std::invalid_argument on an unknown key or unparsable value.
  void set(std::string_view key, std::string_view value);

  // Window actually used: window_m in NLS mode, 0 otherwise.
  int effective_window() const noexcept { return mode == Mode::NlsArpqn ? window_m : 0; }
};

struct TraceRecord {
  long k = 0;
  double f = 0.0;       // F(X_k)
  double norm_v = 0.0;  // ||V_k||_F of the accepted direction
  double sigma = 0.0;   // regularization used for the accepted direction
  double alpha = 0.0;
  double rho = 0.0;
  int backtracks = 0;
  int ssn_iters = 0;  // summed over all re-solves of this iteration
  int resolves = 0;   // r(k): subproblem solves in this iteration

  double f_ref = 0.0;  // F(X_{l(k)})
  double feasibility = 0.0;  // ||X_k^T X_k - I||_F
  double max_rejected_rho = -std::numeric_limits<double>::infinity();
  double sigma_next = 0.0;  // sigma carried to iteration k + 1
};

enum class Status { Converged, MaxIter, Stalled };
std::string_view to_string(Status status);

struct SolveResult {
  StiefelPoint x;
  std::vector<TraceRecord> trace;
  Status status = Status::MaxIter;
  long iterations = 0;  // accepted outer steps
  double objective = 0.0;
  double final_norm_v_sq = 0.0;  // ||V||^2 of the last computed direction
  long total_backtracks = 0;
  long total_ls_trials = 0;  // objective evaluations inside line searches
  long total_ssn_iters = 0;
  long total_subproblems = 0;
};

// max of the last min(m + 1, size) entries. Throws on empty history.
double nonmonotone_reference(std::span<const double> history, int m);

struct LineSearchResult {
  double alpha = 1.0;
  StiefelPoint z;
  double f_trial = 0.0;
  int backtracks = 0;
  bool ok = false;
};

// Backtracks alpha = 1, gamma, gamma^2, ... until
// F(R_X(alpha V)) <= f_ref - 1/2 ls_sigma alpha ||V||^2_B; fails once
// alpha drops below 1e-20.
LineSearchResult line_search(const CompositeProblem& problem, const StiefelPoint& x,
                             const Matrix& v, const DiagonalMetric& metric, double f_ref,
                             const SolverConfig& config);

// (f_trial - f_ref) / (phi_step - phi_zero); +inf when the predicted
// decrease is not negative beyond roundoff.
double compute_rho(double f_trial, double f_ref, double phi_step, double phi_zero);

struct SigmaUpdate {
  double sigma;
  bool accept;
};
SigmaUpdate update_sigma(double sigma, double rho, const SolverConfig& config);

// Constant metric d = max(L, theta_floor), sigma = 0.
DiagonalMetric pg_baseline_metric(const CompositeProblem& problem, Index n,
                                  double theta_floor = 1e-3);

SolveResult solve(const CompositeProblem& problem, const StiefelPoint& x0,
                  const SolverConfig& config);

// Header: k,F,normV,sigma,alpha,rho,backtracks,ssn_iters,resolves
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

}  // namespace arpqn
