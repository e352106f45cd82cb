#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gnig/compat.hpp"
#include "gnig/core_model.hpp"
#include "gnig/priors.hpp"
#include "gnig/selection.hpp"

namespace gnig {

/// Loads a CSV dataset: header row, first column the response, remaining
/// columns the predictors; an intercept column is prepended. Rejects missing
/// files, ragged rows and non-numeric cells (with row/column coordinates),
/// and rank-deficient designs.
Dataset load_dataset(const std::string& path);

/// Resolves a g specification: a positive number, "n", or "max(n,p^2)".
double resolve_g(const std::string& g_spec, int n, int p);

struct RunConfig {
  std::string dataset_path;
  std::vector<ProcedureKind> procedures = {ProcedureKind::KLConjugate, ProcedureKind::Standard,
                                           ProcedureKind::UC, ProcedureKind::Improper};
  PriorMeanChoice mean_choice = PriorMeanChoice::ybar();
  std::string g_spec = "n";
  double d = 1.0;
  double a = 1.0;
  std::uint64_t seed = 1;
  std::string output_format = "csv"; // csv or json
  double gg_c = 1.0;
};

/// One output record of an analysis run. g, d, a are the derived
/// (model-specific) prior hyperparameters.
struct ReportRow {
  std::string model;
  std::string procedure;
  std::string mean_choice;
  double g = 0.0;
  double d = 0.0;
  double a = 0.0;
  std::optional<double> log_marginal; // absent for improper priors
  double post_prob = 0.0;
  std::optional<double> gg_D, gg_G, gg_P;
};

/// Full per-model comparison for each requested procedure: derived priors,
/// posterior model probabilities (uniform model prior, Bayes factors against
/// the full model), and predictive scores.
std::vector<ReportRow> run_analysis(const RunConfig& config, const Dataset& data);
std::vector<ReportRow> run_analysis(const RunConfig& config);

struct SimulationSpec {
  int n = 30;
  int replicates = 50;
  int true_model = 1; // 1, 2 or 3
  double C = 0.0;     // intercept constant of the generating model
  double noise_sd = 2.5;
  std::vector<std::pair<double, double>> hyper_grid = {
      {1, 1}, {1, 10}, {5, 5}, {10, 1}, {10, 50}};
  std::uint64_t seed = 1;
  std::vector<ProcedureKind> procedures = {ProcedureKind::KLConjugate, ProcedureKind::Standard,
                                           ProcedureKind::UC, ProcedureKind::Improper};
  std::vector<PriorMeanChoice> mean_choices = {PriorMeanChoice::zero(), PriorMeanChoice::ybar(),
                                               PriorMeanChoice::ols()};
};

struct SimulationCell {
  int true_model = 1;
  std::string procedure;
  std::string mean_choice;
  double d = 0.0;
  double a = 0.0;
  double frequency = 0.0;
};

/// Correct-identification frequencies over simulated replicates.
///
/// Each replicate draws five standard normal predictor columns (two of them
/// deliberately correlated with the first two), builds the response under
/// the chosen true model with fixed constant C and noise scale, and scores
/// every procedure / mean choice / (d, a) pair by whether the highest Bayes
/// factor against the full model lands on the generating model. Predictors
/// and noise are drawn once per replicate and shared across the whole grid;
/// g is fixed at n.
std::vector<SimulationCell> run_simulation(const SimulationSpec& spec);

/// Generates the design and response of one simulation replicate.
Dataset simulate_replicate(const SimulationSpec& spec, int replicate);

/// Submodel that generated the data in run_simulation.
ModelId simulation_truth(int true_model);

struct IllustrationSpec {
  int n = 25;
  double g = 25.0;
  std::vector<std::pair<double, double>> hypers = {{5, 1}};
  double mu_lo = -4.0;
  double mu_hi = 4.0;
  int mu_steps = 41;
  std::uint64_t seed = 1;
};

struct IllustrationRow {
  double mu = 0.0;
  std::string procedure;
  double d = 0.0;
  double a = 0.0;
  double prob = 0.0; // posterior probability of the location model
};

/// Posterior probability of the location model against pure noise along a
/// grid of true means, for one fixed draw of the errors: y = mu 1 + eps with
/// eps ~ N(0, I_n) drawn once from the seed. Emits one row per
/// (mu, procedure, hyperparameter pair).
std::vector<IllustrationRow> run_illustration(const IllustrationSpec& spec);

/// CSV / JSON emission. Numbers are rendered with 12 significant digits;
/// identical inputs produce byte-identical output.
std::string to_csv(const std::vector<ReportRow>& rows);
std::string to_json(const std::vector<ReportRow>& rows);
std::string to_csv(const std::vector<SimulationCell>& cells);
std::string to_json(const std::vector<SimulationCell>& cells);
std::string to_csv(const std::vector<IllustrationRow>& rows);
std::string to_json(const std::vector<IllustrationRow>& rows);

/// 12-significant-digit number rendering used by every emitter.
std::string format_number(double value);

} // namespace gnig
