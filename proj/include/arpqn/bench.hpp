#pragma once

// Seed-sweep experiment harness: one summary row per
// (mode, retraction, n, r, mu) configuration, averaged over seeds.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arpqn/problems.hpp"
#include "arpqn/solver.hpp"

namespace arpqn {

enum class ProblemKind { Cm, Spca };
std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem(std::string_view name);

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::Cm;
  std::vector<Index> ns;
  std::vector<Index> rs;
  std::vector<double> mus;
  std::vector<Mode> modes{Mode::NlsArpqn};
  std::vector<RetractionKind> retractions{RetractionKind::Svd};
  int seeds = 50;
  std::uint64_t base_seed = 1;
  SolverConfig config;  // mode and retraction are overwritten per row
  CmOptions cm;
  SpcaOptions spca;
  std::optional<std::string> trace_dir;
  unsigned threads = 0;  // 0: BENCH_THREADS or hardware concurrency

  // Throws std::invalid_argument on empty sweeps or seeds < 1.
  void validate() const;

  // Applies one "key=value" override: any SolverConfig field, plus
  // cm_boundary, cm_kinetic, cm_length, spca_m and spca_normalize.
  void apply_override(std::string_view assignment);
};

struct RunOutcome {
  bool failed = false;
  std::string error;
  Status status = Status::MaxIter;
  long iterations = 0;
  double objective = 0.0;
  double sparsity = 0.0;
  double cpu_seconds = 0.0;
  long backtracks = 0;
  double ssn_per_step = 0.0;
};

struct SummaryRow {
  std::string label;
  double iter = 0.0;
  double f = 0.0;
  double sparsity = 0.0;
  double cpu_s = 0.0;
  double linesearch = 0.0;
  double ssn_iters = 0.0;
  int failures = 0;
  int runs = 0;
};

// One seeded run: instance and initial point both derive from seed.
RunOutcome run_single(ProblemKind kind, Index n, Index r, double mu, std::uint64_t seed,
                      const SolverConfig& config, const CmOptions& cm, const SpcaOptions& spca,
                      std::vector<TraceRecord>* trace_out = nullptr);

std::string row_label(ProblemKind kind, Index n, Index r, double mu, Mode mode,
                      RetractionKind retraction);

std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec);

// %.6g
std::string format_sig6(double value);

// Header: label,iter,F,sparsity,cpu_s,linesearch,ssn_iters,failures
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
// Throws std::invalid_argument on empty rows, std::runtime_error when the
// path cannot be written.
void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace arpqn
