#pragma once

#include <cstdint>

#include "ahead/solver.hpp"
#include "ahead/verification.hpp"

namespace ahead {

/// Executes K iterations of the triple update, appending a MetricsRecord
/// (and optionally a state snapshot) at iteration 0, at every logging
/// interval, and at the final iterate. Divergence aborts and returns the
/// partial log with the diverged flag set.
inline RunLog run(const BilevelProblem& problem, const MixingMatrix& network,
                  const StepSizes& p, SolverState state,
                  const AnalysisConstants& constants,
                  const RunOptions& options = {}) {
  if (options.log_interval <= 0)
    throw ConfigError("logging interval must be positive");
  RunLog log;
  auto record = [&](const SolverState& st) {
    if (options.with_metrics) {
      log.records.push_back(
          metrics(problem, network, st, p, constants, options.oracle_tol));
    } else {
      MetricsRecord rec;
      rec.k = st.k;
      log.records.push_back(rec);
    }
    if (options.store_states) log.states.push_back(st);
  };

  record(state);
  for (std::int64_t k = 0; k < p.K; ++k) {
    try {
      state = step(problem, network, state, p);
    } catch (const DivergenceError& err) {
      log.diverged = true;
      log.divergence_message = err.what();
      log.final_state = state;  // last finite iterate
      return log;
    }
    if (state.k % options.log_interval == 0 || state.k == p.K) record(state);
  }
  log.final_state = state;
  return log;
}

}  // namespace ahead
