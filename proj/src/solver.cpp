#include "arpqn/solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <iomanip>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "arpqn/subproblem.hpp"

namespace arpqn {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Arpqn: return "arpqn";
    case Mode::NlsArpqn: return "nls";
    case Mode::PgBaseline: return "pg";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "arpqn") return Mode::Arpqn;
  if (name == "nls" || name == "nls-arpqn") return Mode::NlsArpqn;
  if (name == "pg") return Mode::PgBaseline;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Converged: return "converged";
    case Status::MaxIter: return "maxiter";
    case Status::Stalled: return "stalled";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("SolverConfig: " + msg); };
  if (!(sigma0 > 0.0)) fail("sigma0 must be positive");
  if (!(sigma_min > 0.0)) fail("sigma_min must be positive");
  if (!(0.0 < eta1 && eta1 < eta2 && eta2 < 1.0)) fail("need 0 < eta1 < eta2 < 1");
  if (!(0.0 < gamma1 && gamma1 < 1.0 && 1.0 < gamma2)) fail("need 0 < gamma1 < 1 < gamma2");
  if (!(0.0 < ls_sigma && ls_sigma < 1.0)) fail("need 0 < ls_sigma < 1");
  if (!(0.0 < ls_gamma && ls_gamma < 1.0)) fail("need 0 < ls_gamma < 1");
  if (window_m < 0) fail("window_m must be >= 0");
  if (memory_p < 1) fail("memory_p must be >= 1");
  if (!(theta_floor > 0.0)) fail("theta_floor must be positive");
  if (!(curvature_cos_min >= 0.0 && curvature_cos_min < 1.0))
    fail("curvature_cos_min must lie in [0, 1)");
  if (!(tol_factor > 0.0)) fail("tol_factor must be positive");
  if (max_outer < 0) fail("max_outer must be >= 0");
  if (max_ssn < 1) fail("max_ssn must be >= 1");
  if (max_inner_sigma < 1) fail("max_inner_sigma must be >= 1");
}

namespace {

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config '" + std::string(key) + "': cannot parse '" +
                                std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw std::invalid_argument("config '" + std::string(key) + "': expected true/false, got '" +
                              std::string(text) + "'");
}

}  // namespace

void SolverConfig::set(std::string_view key, std::string_view value) {
  if (key == "sigma0") sigma0 = parse_number<double>(key, value);
  else if (key == "sigma_min") sigma_min = parse_number<double>(key, value);
  else if (key == "eta1") eta1 = parse_number<double>(key, value);
  else if (key == "eta2") eta2 = parse_number<double>(key, value);
  else if (key == "gamma1") gamma1 = parse_number<double>(key, value);
  else if (key == "gamma2") gamma2 = parse_number<double>(key, value);
  else if (key == "ls_sigma") ls_sigma = parse_number<double>(key, value);
  else if (key == "ls_gamma") ls_gamma = parse_number<double>(key, value);
  else if (key == "window_m") window_m = parse_number<int>(key, value);
  else if (key == "memory_p") memory_p = parse_number<int>(key, value);
  else if (key == "theta_floor") theta_floor = parse_number<double>(key, value);
  else if (key == "curvature_cos_min") curvature_cos_min = parse_number<double>(key, value);
  else if (key == "tol_factor") tol_factor = parse_number<double>(key, value);
  else if (key == "max_outer") max_outer = parse_number<long>(key, value);
  else if (key == "max_ssn") max_ssn = parse_number<int>(key, value);
  else if (key == "max_inner_sigma") max_inner_sigma = parse_number<int>(key, value);
  else if (key == "stop_in_metric") stop_in_metric = parse_bool(key, value);
  else if (key == "retraction") retraction = parse_retraction(value);
  else if (key == "mode") mode = parse_mode(value);
  else throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

double nonmonotone_reference(std::span<const double> history, int m) {
  if (history.empty()) throw std::invalid_argument("nonmonotone_reference: empty history");
  if (m < 0) throw std::invalid_argument("nonmonotone_reference: m must be >= 0");
  const std::size_t window = std::min(history.size(), static_cast<std::size_t>(m) + 1);
  const auto tail = history.subspan(history.size() - window);
  return *std::max_element(tail.begin(), tail.end());
}

LineSearchResult line_search(const CompositeProblem& problem, const StiefelPoint& x,
                             const Matrix& v, const DiagonalMetric& metric, double f_ref,
                             const SolverConfig& config) {
  const double decrease = 0.5 * config.ls_sigma * metric_norm_sq(metric, v);
  LineSearchResult out{1.0, x, problem.objective(x.matrix()), 0, false};
  double alpha = 1.0;
  while (alpha >= 1e-20) {
    try {
      StiefelPoint z = retract(x, alpha * v, config.retraction);
      const double fz = problem.objective(z.matrix());
      if (fz <= f_ref - alpha * decrease) {
        out.alpha = alpha;
        out.z = std::move(z);
        out.f_trial = fz;
        out.ok = true;
        return out;
      }
    } catch (const NumericError&) {
      // Treated as a failed trial; shrink and retry.
    }
    alpha *= config.ls_gamma;
    ++out.backtracks;
  }
  out.alpha = alpha;
  return out;
}

double compute_rho(double f_trial, double f_ref, double phi_step, double phi_zero) {
  const double denom = phi_step - phi_zero;
  if (denom >= -1e-16 * std::fabs(phi_zero)) return std::numeric_limits<double>::infinity();
  return (f_trial - f_ref) / denom;
}

SigmaUpdate update_sigma(double sigma, double rho, const SolverConfig& config) {
  if (rho >= config.eta2) return {std::max(config.gamma1 * sigma, config.sigma_min), true};
  if (rho >= config.eta1) return {sigma, true};
  return {config.gamma2 * sigma, false};
}

DiagonalMetric pg_baseline_metric(const CompositeProblem& problem, Index n, double theta_floor) {
  const double l = std::max(problem.lipschitz_estimate(), theta_floor);
  return DiagonalMetric{Vector::Constant(n, l), 0.0};
}

SolveResult solve(const CompositeProblem& problem, const StiefelPoint& x0,
                  const SolverConfig& config) {
  config.validate();
  const Index n = x0.n();
  const Index r = x0.r();
  const bool pg = config.mode == Mode::PgBaseline;
  const int window = config.effective_window();
  const double stop_tol = config.tol_factor * static_cast<double>(n * r);

  SolveResult result{x0, {}, Status::MaxIter, 0, 0.0, 0.0, 0, 0, 0, 0};
  StiefelPoint x = x0;
  double fx = problem.objective(x.matrix());
  Matrix egrad = problem.gradient(x.matrix());
  Matrix rgrad = riemannian_gradient(x, egrad).data;

  std::deque<double> history{fx};
  LbfgsMemory memory(n, config.memory_p, 1.0);
  Vector diag = pg ? pg_baseline_metric(problem, n, config.theta_floor).d : Vector::Ones(n);
  double sigma = pg ? 0.0 : config.sigma0;
  SymmetricMultiplier lambda = SymmetricMultiplier::zero(r);

  Matrix x_prev;
  Matrix g_prev;

  auto finish = [&](Status status) {
    result.status = status;
    result.x = x;
    result.objective = fx;
    return result;
  };

  for (long k = 0; k < config.max_outer; ++k) {
    if (k >= 1 && !pg) {
      const Matrix s = x.matrix() - x_prev;
      const Matrix y = rgrad - g_prev;
      // Nearly orthogonal pairs make tr(y^T y)/tr(s^T y) blow up; keep the
      // previous metric instead.
      if (curvature_cosine(s, y) >= config.curvature_cos_min) {
        const double theta = theta_init(s, y, config.theta_floor);
        memory.set_theta(theta);
        if (auto pair = damp_pair(s, y, theta)) memory.push(std::move(*pair));
        diag = build_diag(memory);
      }
    }

    const std::vector<double> hist(history.begin(), history.end());
    const double f_ref = nonmonotone_reference(hist, window);
    const double ssn_tol = default_ssn_tol(egrad);

    TraceRecord rec;
    rec.k = k;
    rec.f = fx;
    rec.f_ref = f_ref;
    rec.feasibility = feasibility_residual(x.matrix());

    std::optional<LineSearchResult> step;
    while (true) {
      ++rec.resolves;
      const DiagonalMetric metric{diag, sigma};
      const SubproblemModel model(x, egrad, metric, problem.mu());
      SubproblemResult sub = ssn_solve(model, lambda, SsnOptions{ssn_tol, config.max_ssn});
      lambda = sub.lambda;
      rec.ssn_iters += sub.ssn_iters;
      ++result.total_subproblems;
      result.total_ssn_iters += sub.ssn_iters;

      const Matrix& v = sub.v.data;
      const double nv2 = v.squaredNorm();
      result.final_norm_v_sq = nv2;
      const double stop_q =
          config.stop_in_metric ? std::max(nv2, metric_norm_sq(metric, v)) : nv2;
      if (rec.resolves == 1 && stop_q <= stop_tol) return finish(Status::Converged);

      LineSearchResult ls = line_search(problem, x, v, metric, pg ? fx : f_ref, config);
      rec.backtracks += ls.backtracks;
      result.total_backtracks += ls.backtracks;
      result.total_ls_trials += ls.backtracks + (ls.ok ? 1 : 0);

      double rho = -std::numeric_limits<double>::infinity();
      if (ls.ok) {
        const Matrix step_v = ls.alpha * v;
        rho = compute_rho(ls.f_trial, f_ref, model.objective(step_v),
                          model.objective(Matrix::Zero(n, r)));
      }

      if (pg) {
        if (!ls.ok) return finish(Status::Stalled);
        rec.sigma = 0.0;
        rec.sigma_next = 0.0;
        rec.rho = rho;
        rec.alpha = ls.alpha;
        rec.norm_v = std::sqrt(nv2);
        step = std::move(ls);
        break;
      }

      const SigmaUpdate upd = update_sigma(sigma, rho, config);
      if (upd.accept) {
        rec.sigma = sigma;
        rec.sigma_next = upd.sigma;
        rec.rho = rho;
        rec.alpha = ls.alpha;
        rec.norm_v = std::sqrt(nv2);
        sigma = upd.sigma;
        step = std::move(ls);
        break;
      }
      rec.max_rejected_rho = std::max(rec.max_rejected_rho, rho);
      sigma = upd.sigma;
      if (rec.resolves >= config.max_inner_sigma) return finish(Status::Stalled);
    }

    x_prev = x.matrix();
    g_prev = rgrad;
    x = std::move(step->z);
    fx = step->f_trial;
    egrad = problem.gradient(x.matrix());
    rgrad = riemannian_gradient(x, egrad).data;

    history.push_back(fx);
    while (history.size() > static_cast<std::size_t>(window) + 1) history.pop_front();

    result.trace.push_back(rec);
    result.iterations = k + 1;
  }
  return finish(Status::MaxIter);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "k,F,normV,sigma,alpha,rho,backtracks,ssn_iters,resolves\n";
  const auto old = out.precision(17);
  for (const auto& t : trace) {
    out << t.k << ',' << t.f << ',' << t.norm_v << ',' << t.sigma << ',' << t.alpha << ','
        << t.rho << ',' << t.backtracks << ',' << t.ssn_iters << ',' << t.resolves << '\n';
  }
  out.precision(old);
}

}  // namespace arpqn
