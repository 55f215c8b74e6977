#pragma once

#include "mddest/dgp.hpp"
#include "mddest/optimizer.hpp"
#include "mddest/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mddest {

enum class EstimatorKind { Mdd, Dl };

std::string to_string(EstimatorKind kind);

struct ExperimentConfig {
  int dgp_id = 1;
  int n = 200;
  int replications = 1000;
  std::vector<EstimatorKind> estimators = {EstimatorKind::Mdd, EstimatorKind::Dl};
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
  int burn_in = 200;
  OptimizerConfig optimizer;
};

struct ParamSummary {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;  // mean(theta_hat) - truth
  double asd = 0.0;   // mean of the per-replication analytic standard errors
  double esd = 0.0;   // standard deviation of theta_hat across replications (R-1 divisor)
};

struct McSummary {
  int dgp_id = 0;
  int n = 0;
  EstimatorKind estimator = EstimatorKind::Mdd;
  int replications = 0;  // requested
  int converged = 0;     // aggregates cover converged replications only
  std::uint64_t seed = 0;
  std::vector<ParamSummary> params;
  double elapsed_seconds = 0.0;  // runtime stat, excluded from serialization
};

/// Runs `replications` independent replications (generate, estimate,
/// analytic SE) for each requested estimator and aggregates bias/ASD/ESD
/// per parameter.  Replication r draws from stream r of the master seed and
/// failed replications only increment the non-converged count, so the
/// result is identical to the last bit for a fixed (config, seed)
/// regardless of worker count.
std::vector<McSummary> run_experiment(const ExperimentConfig& config);

enum class TableFormat { Csv, Json, TextGrid };

/// Serializes summaries with stable column order (estimator, parameter, n,
/// bias, asd, esd, ...).  The text grid pivots the n values side by side in
/// the layout of the simulation tables.  Numbers carry 17 significant
/// digits in csv/json so a round trip is exact.
std::string emit_table(const std::vector<McSummary>& summaries, TableFormat format);

/// Parses the csv produced by emit_table back into summaries.
std::vector<McSummary> parse_table_csv(const std::string& csv);

/// Field-wise equality ignoring the runtime stats.
bool summaries_equivalent(const std::vector<McSummary>& a, const std::vector<McSummary>& b);

}  // namespace mddest
