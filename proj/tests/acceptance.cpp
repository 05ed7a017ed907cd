// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Seeds follow the bench policy (run i uses seed 1 + i for
// both the instance and the initial point).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "arpqn/metric.hpp"
#include "arpqn/problems.hpp"
#include "arpqn/solver.hpp"
#include "arpqn/subproblem.hpp"
#include "support.hpp"

using namespace arpqn;

namespace {

struct Run {
  Index n, r;
  double mu;
  SolveResult res;
  double seconds;
};

Run run_cm(Index n, Index r, double mu, std::uint64_t seed, Mode mode,
           RetractionKind ret = RetractionKind::Svd) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.retraction = ret;
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res = solve(make_cm(n, r, mu), random_point(n, r, seed), cfg);
  const auto t1 = std::chrono::steady_clock::now();
  return {n, r, mu, std::move(res), std::chrono::duration<double>(t1 - t0).count()};
}

std::vector<Run> sweep(Index n, Index r, double mu, int seeds, Mode mode,
                       RetractionKind ret = RetractionKind::Svd) {
  std::vector<Run> out;
  for (int i = 0; i < seeds; ++i) out.push_back(run_cm(n, r, mu, 1 + i, mode, ret));
  return out;
}

double mean(const std::vector<Run>& runs, const std::function<double(const Run&)>& f) {
  double s = 0.0;
  for (const auto& r : runs) s += f(r);
  return s / static_cast<double>(runs.size());
}

double mean_f(const std::vector<Run>& runs) {
  return mean(runs, [](const Run& r) { return r.res.objective; });
}
double mean_sparsity(const std::vector<Run>& runs) {
  return mean(runs, [](const Run& r) { return sparsity(r.res.x.matrix()); });
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Stationarity, feasibility and sigma-control checks of one run.
struct ContractTally {
  int runs = 0, converged = 0, violations = 0;
  double worst_feas = 0.0;
  double max_sigma = 0.0;
};

void check_contract(const Run& run, const SolverConfig& cfg, ContractTally& t) {
  ++t.runs;
  const SolveResult& res = run.res;
  bool ok = true;
  if (res.status == Status::Converged) {
    ++t.converged;
    const double tol = cfg.tol_factor * static_cast<double>(run.n * run.r);
    ok &= res.final_norm_v_sq <= tol;
  }
  const double feas = feasibility_residual(res.x.matrix());
  t.worst_feas = std::max(t.worst_feas, feas);
  ok &= feas <= 1e-10;
  double sigma_in = cfg.sigma0;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const TraceRecord& rec = res.trace[i];
    t.worst_feas = std::max(t.worst_feas, rec.feasibility);
    t.max_sigma = std::max(t.max_sigma, std::max(rec.sigma, rec.sigma_next));
    ok &= rec.feasibility <= 1e-10;
    ok &= rec.sigma <= 1e8 && rec.sigma_next <= 1e8;
    if (i > 0) ok &= rec.f_ref <= res.trace[i - 1].f_ref;
    if (cfg.mode != Mode::PgBaseline) {
      ok &= rec.rho >= cfg.eta1;
      if (rec.resolves > 1) {
        ok &= rec.max_rejected_rho < cfg.eta1;
        const double expect = sigma_in * std::pow(cfg.gamma2, rec.resolves - 1);
        ok &= std::abs(rec.sigma - expect) <= 1e-12 * expect;
      } else {
        ok &= rec.sigma == sigma_in;
      }
      sigma_in = rec.sigma_next;
    }
  }
  if (!ok) ++t.violations;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Run> all;
  auto keep = [&all](const std::vector<Run>& runs) {
    all.insert(all.end(), runs.begin(), runs.end());
  };

  // 1. CM objective reproduction.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto runs = sweep(64, 4, 0.1, 20, Mode::NlsArpqn);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double f = mean_f(runs), sp = mean_sparsity(runs);
    report(1, std::abs(f - 1.425) <= 0.02 && sp >= 0.75 && sp <= 0.85 && secs < 5.0,
           fmt("CM(64,4,0.1) 20 seeds: mean F = %.5f (1.425 +- 0.02), sparsity = %.4f "
               "([0.75, 0.85]), total %.2f s (< 5 s)",
               f, sp, secs));
    keep(runs);
  }

  // 2. CM scaling points.
  {
    const auto a = sweep(256, 4, 0.2, 20, Mode::NlsArpqn);
    const auto b = sweep(512, 4, 0.1, 20, Mode::NlsArpqn);
    const double fa = mean_f(a), fb = mean_f(b), sb = mean_sparsity(b);
    report(2,
           std::abs(fa - 4.336) <= 0.02 && std::abs(fb - 3.296) <= 0.02 &&
               std::abs(sb - 0.86) <= 0.005,
           fmt("20 seeds: CM(256,4,0.2) mean F = %.5f (4.336 +- 0.02); CM(512,4,0.1) mean F = "
               "%.5f (3.296 +- 0.02), sparsity = %.4f (0.86 to two decimals)",
               fa, fb, sb));
    keep(a);
    keep(b);
  }

  // 3. Retraction agreement.
  {
    std::vector<double> fs;
    std::string detail = "CM(256,4,0.1) 20 seeds:";
    for (RetractionKind k : {RetractionKind::Svd, RetractionKind::Qr, RetractionKind::Cayley}) {
      const auto runs = sweep(256, 4, 0.1, 20, Mode::NlsArpqn, k);
      fs.push_back(mean_f(runs));
      detail += fmt(" %s %.5f", std::string(to_string(k)).c_str(), fs.back());
      keep(runs);
    }
    const double spread = *std::max_element(fs.begin(), fs.end()) -
                          *std::min_element(fs.begin(), fs.end());
    report(3, spread <= 0.01, detail + fmt("; spread %.2e (<= 0.01)", spread));
  }

  // 4. Method agreement and line-search effort; 9. iteration-count sanity.
  {
    const int seeds = 10;
    const auto mono = sweep(128, 10, 0.1, seeds, Mode::Arpqn);
    const auto nls = sweep(128, 10, 0.1, seeds, Mode::NlsArpqn);
    const auto pg = sweep(128, 10, 0.1, seeds, Mode::PgBaseline);
    double worst = 0.0;
    long trials_nls = 0, trials_pg = 0, bt_nls = 0, bt_pg = 0;
    for (int i = 0; i < seeds; ++i) {
      worst = std::max(worst, std::abs(mono[i].res.objective - nls[i].res.objective));
      trials_nls += nls[i].res.total_ls_trials;
      trials_pg += pg[i].res.total_ls_trials;
      bt_nls += nls[i].res.total_backtracks;
      bt_pg += pg[i].res.total_backtracks;
    }
    report(4, worst <= 1e-3 && trials_nls < trials_pg,
           fmt("CM(128,10,0.1) %d seeds: max |F_arpqn - F_nls| = %.2e (<= 1e-3); line-search "
               "trials NLS %ld < PG %ld (backtracks only: NLS %ld, PG %ld)",
               seeds, worst, trials_nls, trials_pg, bt_nls, bt_pg));
    keep(mono);
    keep(nls);
    keep(pg);

    const double iters = mean(nls, [](const Run& r) { return double(r.res.iterations); });
    const double ssn = mean(nls, [](const Run& r) {
      return r.res.iterations > 0 ? double(r.res.total_ssn_iters) / double(r.res.iterations)
                                  : 0.0;
    });
    report(9, iters < 5000.0 && ssn < 5.0,
           fmt("NLS on CM(128,10,0.1) %d seeds: mean outer iterations %.1f (< 5000), mean SSN "
               "iterations per outer step %.3f (< 5)",
               seeds, iters, ssn));
  }

  // 5. Subproblem oracle equivalence.
  {
    int count = 0, bad = 0;
    double worst_dv = 0.0, worst_dphi = -std::numeric_limits<double>::infinity();
    const std::pair<Index, Index> shapes[] = {{6, 2}, {10, 3}};
    for (const auto& [n, r] : shapes) {
      for (double mu : {0.0, 0.1, 1.0}) {
        for (std::uint64_t s = 0; s < 50; ++s) {
          const std::uint64_t seed = 10000 + 1000 * static_cast<std::uint64_t>(n) +
                                     static_cast<std::uint64_t>(mu * 100) * 50 + s;
          const StiefelPoint x(oracle::orthonormal(n, r, seed));
          const Matrix g = oracle::gaussian(n, r, seed + 1);
          const DiagonalMetric metric{oracle::uniform(n, 0.5, 3.0, seed + 2),
                                      oracle::uniform(1, 0.0, 1.0, seed + 3)(0)};
          const SubproblemModel model(x, g, metric, mu);
          const SubproblemResult sub = ssn_solve(model, SymmetricMultiplier::zero(r),
                                                 SsnOptions{default_ssn_tol(g), 100});
          const oracle::Sub raw{x.matrix(), g, metric.weights(), mu};
          const Matrix ref = mu == 0.0 ? oracle::kkt_solution(raw) : oracle::l1_solution(raw);
          const double dv = (sub.v.data - ref).norm();
          const double dphi = oracle::phi(raw, sub.v.data) - oracle::phi(raw, ref);
          worst_dv = std::max(worst_dv, dv);
          worst_dphi = std::max(worst_dphi, dphi);
          if (!(dv <= 1e-6 && dphi <= 1e-8)) ++bad;
          ++count;
        }
      }
    }
    report(5, bad == 0,
           fmt("%d instances on St(6,2), St(10,3), mu in {0, 0.1, 1}: max ||dV|| = %.2e (<= "
               "1e-6), max phi_ssn - phi_oracle = %.2e (<= 1e-8), %d mismatches",
               count, worst_dv, worst_dphi, bad));
  }

  // 6. Stationarity and feasibility contract over every run above.
  {
    ContractTally t;
    for (const Run& run : all) {
      SolverConfig cfg;
      cfg.mode = run.res.trace.empty() || run.res.trace.front().sigma != 0.0
                     ? Mode::NlsArpqn
                     : Mode::PgBaseline;
      check_contract(run, cfg, t);
    }
    report(6, t.violations == 0 && t.converged == t.runs,
           fmt("%d runs, %d converged: %d contract violations; worst ||X^T X - I|| = %.2e (<= "
               "1e-10), max sigma = %.3g (<= 1e8)",
               t.runs, t.converged, t.violations, t.worst_feas, t.max_sigma));
  }

  // 7. Analytic minimum of l1 on the sphere.
  {
    int count = 0, bad = 0;
    double worst_f = 0.0, worst_x = 0.0;
    for (Index n : {3, 8, 20, 64, 200}) {
      SpcaOptions zero;
      zero.data_override = Matrix::Zero(50, n);
      const CompositeProblem p = make_spca(n, 1, 1.0, 0, zero);
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SolveResult res = solve(p, random_point(n, 1, seed), SolverConfig{});
        const Vector x = res.x.matrix().col(0);
        Index i = 0;
        x.cwiseAbs().maxCoeff(&i);
        Vector e = Vector::Zero(n);
        e(i) = x(i) >= 0.0 ? 1.0 : -1.0;
        const double df = std::abs(res.objective - 1.0);
        const double dx = (x - e).norm();
        worst_f = std::max(worst_f, df);
        worst_x = std::max(worst_x, dx);
        if (!(df <= 1e-6 && dx <= 1e-4)) ++bad;
        ++count;
      }
    }
    report(7, bad == 0,
           fmt("A = 0, mu = 1, r = 1, n in {3..200}, %d runs: max |F - 1| = %.2e (<= 1e-6), "
               "max distance to a signed coordinate vector = %.2e (<= 1e-4)",
               count, worst_f, worst_x));
  }

  // 8. Matrix-free LBFGS diagonal against the dense recursion.
  {
    int bad = 0;
    double worst = 0.0, min_d = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const Index n = 1 + static_cast<Index>(seed % 16);
      const Index r = 1 + static_cast<Index>(seed % 3);
      const int p = 1 + static_cast<int>(seed % 5);
      const double theta = 0.05 + static_cast<double>(seed % 9);
      LbfgsMemory mem(n, p, theta);
      std::vector<oracle::Pair> dense;
      for (int j = 0; j < p; ++j) {
        const Matrix s = oracle::gaussian(n, r, seed * 101 + j);
        const Matrix y = oracle::gaussian(n, r, seed * 103 + j) + 0.5 * s;
        auto pair = damp_pair(s, y, theta);
        if (!pair) continue;
        dense.push_back({pair->s, pair->y_damped});
        mem.push(std::move(*pair));
      }
      const Vector fast = build_diag(mem);
      const Vector slow = oracle::dense_lbfgs_diag(n, theta, dense);
      const double err = (fast - slow).cwiseAbs().maxCoeff() / (1.0 + slow.cwiseAbs().maxCoeff());
      worst = std::max(worst, err);
      min_d = std::min(min_d, fast.minCoeff());
      if (!(err <= 1e-10 && fast.minCoeff() > 0.0)) ++bad;
    }
    report(8, bad == 0,
           fmt("100 random memories (n <= 16, p <= 5): max relative deviation %.2e (<= 1e-10), "
               "min diagonal entry %.3g (> 0)",
               worst, min_d));
  }

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s: %d criteria failed, %.1f s\n", failures == 0 ? "OK" : "FAILED", failures,
              total);
  return failures == 0 ? 0 : 1;
}
