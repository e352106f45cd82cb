#include "gnig/experiments.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gnig/errors.hpp"
#include "gnig/rng.hpp"

namespace gnig {

namespace {

// Stream identifiers for the counter-based generator.
constexpr std::uint64_t kStreamPredictor = 100; // + column index
constexpr std::uint64_t kStreamNoise = 200;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_cell(const std::string& raw, int row, int col) {
  const std::string t = trim(raw);
  if (t.empty()) {
    throw DataError("load_dataset: empty cell at row " + std::to_string(row) + ", column " +
                    std::to_string(col));
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw DataError("load_dataset: non-numeric cell '" + t + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
  }
  return v;
}

} // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_dataset: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_dataset: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  const int ncols = static_cast<int>(header.size());
  if (ncols < 1) throw DataError("load_dataset: header row has no columns");

  std::vector<std::vector<double>> rows;
  int row_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++row_index;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (static_cast<int>(cells.size()) != ncols) {
      throw DataError("load_dataset: row " + std::to_string(row_index) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(ncols));
    }
    std::vector<double> parsed(ncols);
    for (int c = 0; c < ncols; ++c) parsed[c] = parse_cell(cells[c], row_index, c + 1);
    rows.push_back(std::move(parsed));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw DataError("load_dataset: no data rows in '" + path + "'");

  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, ncols); // intercept + predictors
  std::vector<std::string> names;
  names.push_back("intercept");
  for (int c = 1; c < ncols; ++c) names.push_back(trim(header[c]));
  for (int i = 0; i < n; ++i) {
    y(i) = rows[i][0];
    X(i, 0) = 1.0;
    for (int c = 1; c < ncols; ++c) X(i, c) = rows[i][c];
  }
  return make_dataset(std::move(y), std::move(X), std::move(names));
}

double resolve_g(const std::string& g_spec, int n, int p) {
  if (g_spec == "n") return static_cast<double>(n);
  if (g_spec == "max(n,p^2)") return static_cast<double>(std::max(n, p * p));
  char* end = nullptr;
  const double g = std::strtod(g_spec.c_str(), &end);
  if (end != g_spec.c_str() + g_spec.size() || !(g > 0.0)) {
    throw UsageError("invalid g specification '" + g_spec + "'");
  }
  return g;
}

std::vector<ReportRow> run_analysis(const RunConfig& config, const Dataset& data) {
  const int p = data.p();
  const double g = resolve_g(config.g_spec, data.n(), p);
  const Eigen::VectorXd b = resolve_prior_mean(config.mean_choice, data);
  const std::vector<ModelId> models = enumerate_models(p);
  const ModelId full = ModelId::full(p);
  const std::string mean_name = mean_choice_name(config.mean_choice);

  std::vector<ReportRow> rows;
  rows.reserve(models.size() * config.procedures.size());
  for (ProcedureKind kind : config.procedures) {
    const NigPrior full_prior = (kind == ProcedureKind::Improper)
                                    ? improper_nig(b, g)
                                    : proper_nig(b, g, config.d, config.a);
    std::vector<DerivedPrior> derived;
    derived.reserve(models.size());
    BayesFactorMatrix bfm;
    bfm.models = models;
    bfm.ref = full;
    bfm.log_bf_vs_ref.resize(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
      try {
        derived.push_back(derive_prior(kind, full_prior, models[i], data.X));
        bfm.log_bf_vs_ref(i) = log_bayes_factor(derived.back().prior, full_prior, models[i], full,
                                                data);
      } catch (const Error& e) {
        throw NumericError("model " + models[i].label() + ", procedure " + procedure_name(kind) +
                           ": " + e.what());
      }
    }
    const Eigen::VectorXd probs = posterior_model_probs(bfm);
    for (std::size_t i = 0; i < models.size(); ++i) {
      ReportRow row;
      row.model = models[i].label();
      row.procedure = procedure_name(kind);
      row.mean_choice = mean_name;
      row.g = derived[i].prior.g;
      row.d = derived[i].prior.d;
      row.a = derived[i].prior.a;
      if (derived[i].prior.proper) {
        row.log_marginal = log_marginal_likelihood(derived[i].prior, data, models[i]);
      }
      row.post_prob = probs(i);
      try {
        const GGScore gg = gelfand_ghosh(derived[i].prior, models[i], data, config.gg_c);
        row.gg_D = gg.D;
        row.gg_G = gg.G;
        row.gg_P = gg.P;
      } catch (const Error& e) {
        throw NumericError("model " + models[i].label() + ", procedure " + procedure_name(kind) +
                           ": " + e.what());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ReportRow> run_analysis(const RunConfig& config) {
  return run_analysis(config, load_dataset(config.dataset_path));
}

ModelId simulation_truth(int true_model) {
  switch (true_model) {
    case 1: return ModelId::intercept_only();
    case 2: return ModelId({0, 1, 3, 5});
    case 3: return ModelId({0, 1, 3, 4, 5});
    default: throw UsageError("simulation truth must be 1, 2 or 3");
  }
}

Dataset simulate_replicate(const SimulationSpec& spec, int replicate) {
  const int n = spec.n;
  Eigen::MatrixXd Z(n, 5);
  for (int j = 0; j < 5; ++j) {
    CounterRng rng(spec.seed, {static_cast<std::uint64_t>(replicate), kStreamPredictor + j + 1});
    for (int i = 0; i < n; ++i) Z(i, j) = rng.next_normal();
  }
  Eigen::MatrixXd X(n, 6);
  X.col(0).setOnes();
  X.col(1) = Z.col(0);
  X.col(2) = Z.col(1);
  X.col(3) = Z.col(2);
  // The last two predictors load on the first two and then add fresh noise.
  const Eigen::VectorXd shared = 0.3 * Z.col(0) + 0.7 * Z.col(1);
  X.col(4) = shared + Z.col(3);
  X.col(5) = shared + Z.col(4);

  CounterRng noise(spec.seed, {static_cast<std::uint64_t>(replicate), kStreamNoise});
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps(i) = noise.next_normal();

  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, spec.C) + spec.noise_sd * eps;
  switch (spec.true_model) {
    case 1: break;
    case 2: y += 2.0 * X.col(1) - X.col(3) + 1.5 * X.col(5); break;
    case 3: y += 2.0 * X.col(1) - X.col(3) + X.col(4) + 1.5 * X.col(5); break;
    default: throw UsageError("simulation truth must be 1, 2 or 3");
  }
  return make_dataset(std::move(y), std::move(X));
}

std::vector<SimulationCell> run_simulation(const SimulationSpec& spec) {
  if (spec.replicates < 1) throw UsageError("run_simulation: need at least one replicate");
  const ModelId truth = simulation_truth(spec.true_model);
  const std::vector<ModelId> models = enumerate_models(6);
  const ModelId full = ModelId::full(6);

  // cell key order: procedure, mean, grid row (improper collapses the grid).
  struct Key {
    ProcedureKind kind;
    std::size_t mean_index;
    double d, a;
  };
  std::vector<Key> keys;
  for (ProcedureKind kind : spec.procedures) {
    for (std::size_t mi = 0; mi < spec.mean_choices.size(); ++mi) {
      if (kind == ProcedureKind::Improper) {
        keys.push_back({kind, mi, 0.0, 0.0});
      } else {
        for (const auto& [d, a] : spec.hyper_grid) keys.push_back({kind, mi, d, a});
      }
    }
  }
  std::vector<int> hits(keys.size(), 0);

  for (int r = 0; r < spec.replicates; ++r) {
    const Dataset data = simulate_replicate(spec, r);
    const double g = static_cast<double>(spec.n);
    for (std::size_t ki = 0; ki < keys.size(); ++ki) {
      const Key& key = keys[ki];
      const Eigen::VectorXd b = resolve_prior_mean(spec.mean_choices[key.mean_index], data);
      const NigPrior full_prior = (key.kind == ProcedureKind::Improper)
                                      ? improper_nig(b, g)
                                      : proper_nig(b, g, key.d, key.a);
      double best = -1e308;
      std::size_t best_index = 0;
      for (std::size_t i = 0; i < models.size(); ++i) {
        const DerivedPrior derived = derive_prior(key.kind, full_prior, models[i], data.X);
        const double lbf = log_bayes_factor(derived.prior, full_prior, models[i], full, data);
        if (lbf > best) {
          best = lbf;
          best_index = i;
        }
      }
      if (models[best_index] == truth) ++hits[ki];
    }
  }

  std::vector<SimulationCell> cells;
  cells.reserve(keys.size());
  for (std::size_t ki = 0; ki < keys.size(); ++ki) {
    SimulationCell cell;
    cell.true_model = spec.true_model;
    cell.procedure = procedure_name(keys[ki].kind);
    cell.mean_choice = mean_choice_name(spec.mean_choices[keys[ki].mean_index]);
    cell.d = keys[ki].d;
    cell.a = keys[ki].a;
    cell.frequency = static_cast<double>(hits[ki]) / spec.replicates;
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<IllustrationRow> run_illustration(const IllustrationSpec& spec) {
  if (spec.mu_steps < 1) throw UsageError("run_illustration: need at least one grid point");
  const int n = spec.n;
  CounterRng rng(spec.seed, {0, kStreamNoise});
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps(i) = rng.next_normal();

  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
  const ModelId location = ModelId::intercept_only();
  const ModelId noise_only; // empty model
  const std::vector<ProcedureKind> procedures = {ProcedureKind::Standard, ProcedureKind::Improper,
                                                 ProcedureKind::UC, ProcedureKind::KLConjugate};

  std::vector<IllustrationRow> rows;
  for (int step = 0; step < spec.mu_steps; ++step) {
    const double mu = spec.mu_steps == 1
                          ? spec.mu_lo
                          : spec.mu_lo + (spec.mu_hi - spec.mu_lo) * step / (spec.mu_steps - 1);
    const Dataset data = make_dataset(Eigen::VectorXd::Constant(n, mu) + eps, X);
    for (const auto& [d, a] : spec.hypers) {
      for (ProcedureKind kind : procedures) {
        const Eigen::VectorXd b0 = Eigen::VectorXd::Zero(1);
        const NigPrior full_prior = (kind == ProcedureKind::Improper)
                                        ? improper_nig(b0, spec.g)
                                        : proper_nig(b0, spec.g, d, a);
        const DerivedPrior derived = derive_prior(kind, full_prior, noise_only, data.X);
        const double lbf =
            log_bayes_factor(derived.prior, full_prior, noise_only, location, data);
        IllustrationRow row;
        row.mu = mu;
        row.procedure = procedure_name(kind);
        row.d = d;
        row.a = a;
        // Pr(location model | y) with prior odds 1 against the noise model.
        row.prob = 1.0 / (1.0 + std::exp(lbf));
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", c);
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

std::string opt_csv(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string opt_json(const std::optional<double>& v) { return v ? format_number(*v) : "null"; }

} // namespace

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "model,procedure,mean_choice,g,d,a,log_marginal,post_prob,gg_D,gg_G,gg_P\n";
  for (const auto& r : rows) {
    out += r.model + ',' + r.procedure + ',' + r.mean_choice + ',' + format_number(r.g) + ',' +
           format_number(r.d) + ',' + format_number(r.a) + ',' + opt_csv(r.log_marginal) + ',' +
           format_number(r.post_prob) + ',' + opt_csv(r.gg_D) + ',' + opt_csv(r.gg_G) + ',' +
           opt_csv(r.gg_P) + '\n';
  }
  return out;
}

std::string to_json(const std::vector<ReportRow>& rows) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += "  {\"model\":\"" + json_escape(r.model) + "\",\"procedure\":\"" +
           json_escape(r.procedure) + "\",\"mean_choice\":\"" + json_escape(r.mean_choice) +
           "\",\"g\":" + format_number(r.g) + ",\"d\":" + format_number(r.d) +
           ",\"a\":" + format_number(r.a) + ",\"log_marginal\":" + opt_json(r.log_marginal) +
           ",\"post_prob\":" + format_number(r.post_prob) + ",\"gg_D\":" + opt_json(r.gg_D) +
           ",\"gg_G\":" + opt_json(r.gg_G) + ",\"gg_P\":" + opt_json(r.gg_P) + "}";
    out += (i + 1 < rows.size()) ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

std::string to_csv(const std::vector<SimulationCell>& cells) {
  std::string out = "truth,procedure,mean_choice,d,a,frequency\n";
  for (const auto& c : cells) {
    out += "M" + std::to_string(c.true_model) + ',' + c.procedure + ',' + c.mean_choice + ',' +
           format_number(c.d) + ',' + format_number(c.a) + ',' + format_number(c.frequency) + '\n';
  }
  return out;
}

std::string to_json(const std::vector<SimulationCell>& cells) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    out += "  {\"truth\":\"M" + std::to_string(c.true_model) + "\",\"procedure\":\"" +
           json_escape(c.procedure) + "\",\"mean_choice\":\"" + json_escape(c.mean_choice) +
           "\",\"d\":" + format_number(c.d) + ",\"a\":" + format_number(c.a) +
           ",\"frequency\":" + format_number(c.frequency) + "}";
    out += (i + 1 < cells.size()) ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

std::string to_csv(const std::vector<IllustrationRow>& rows) {
  std::string out = "mu,procedure,d,a,prob\n";
  for (const auto& r : rows) {
    out += format_number(r.mu) + ',' + r.procedure + ',' + format_number(r.d) + ',' +
           format_number(r.a) + ',' + format_number(r.prob) + '\n';
  }
  return out;
}

std::string to_json(const std::vector<IllustrationRow>& rows) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += "  {\"mu\":" + format_number(r.mu) + ",\"procedure\":\"" + json_escape(r.procedure) +
           "\",\"d\":" + format_number(r.d) + ",\"a\":" + format_number(r.a) +
           ",\"prob\":" + format_number(r.prob) + "}";
    out += (i + 1 < rows.size()) ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

} // namespace gnig
