// Command-line front end: fit conditional moment models on CSV data, run
// simulation experiments, dump generated samples.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 estimation non-convergence.

#include "mddest/builtin_models.hpp"
#include "mddest/csv.hpp"
#include "mddest/dgp.hpp"
#include "mddest/estimators.hpp"
#include "mddest/montecarlo.hpp"
#include "mddest/types.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitEstimation = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  std::string data_path;
  std::string model = "linear";
  std::vector<std::string> response;
  std::vector<std::string> regressors;
  std::string conditioning;  // "lags:A-B" or comma-separated column names
  int lags = 1;
  int threshold_lag = 1;
  double threshold = 0.0;
  bool intercept = false;
  bool no_intercept = false;
  bool log_returns_pct = false;
  std::string estimator = "mdd";
  std::string format = "text";
  std::uint64_t seed = 0;
  int multistart = 5;
  int max_iter = 500;
};

int column_index(const mddest::CsvTable& table, const std::string& name) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    throw ConfigError("column '" + name + "' not found in data (header has " +
                      std::to_string(table.header.size()) + " columns)");
  }
  return static_cast<int>(it - table.header.begin());
}

struct ConditioningSpec {
  int lag_from = 0, lag_to = 0;        // lag range when lag-based
  std::vector<std::string> columns;    // explicit columns otherwise
  bool lag_based() const { return lag_to > 0; }
};

ConditioningSpec parse_conditioning(const std::string& text) {
  ConditioningSpec spec;
  if (text.rfind("lags:", 0) == 0) {
    std::string range = text.substr(5);
    auto dash = range.find('-');
    try {
      if (dash == std::string::npos) {
        spec.lag_from = 1;
        spec.lag_to = std::stoi(range);
      } else {
        spec.lag_from = std::stoi(range.substr(0, dash));
        spec.lag_to = std::stoi(range.substr(dash + 1));
      }
    } catch (const std::exception&) {
      throw ConfigError("cannot parse --conditioning '" + text + "'");
    }
    if (spec.lag_from < 1 || spec.lag_to < spec.lag_from) {
      throw ConfigError("conditioning lag range must satisfy 1 <= from <= to");
    }
    return spec;
  }
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (!item.empty()) spec.columns.push_back(item);
  }
  if (spec.columns.empty()) {
    throw ConfigError("conditioning set must not be empty");
  }
  return spec;
}

Eigen::MatrixXd log_returns_pct(const Eigen::MatrixXd& prices) {
  if (prices.rows() < 2) throw DataError("log returns need at least 2 rows");
  Eigen::MatrixXd out(prices.rows() - 1, prices.cols());
  for (Eigen::Index t = 1; t < prices.rows(); ++t) {
    for (Eigen::Index j = 0; j < prices.cols(); ++j) {
      if (!(prices(t, j) > 0.0) || !(prices(t - 1, j) > 0.0)) {
        throw DataError("log returns need strictly positive prices (row " +
                        std::to_string(t + 1) + ")");
      }
      out(t - 1, j) = 100.0 * (std::log(prices(t, j)) - std::log(prices(t - 1, j)));
    }
  }
  return out;
}

struct FitProblem {
  mddest::Sample sample;
  mddest::ResidualModel model;
  std::string description;
};

// Assembles the lagged design: rows t = L..T-1 with L the largest lag any
// part of the model or conditioning set needs.
FitProblem build_problem(const FitOptions& opt, const mddest::CsvTable& table) {
  using namespace mddest;
  FitProblem problem;

  std::vector<std::string> response = opt.response;
  if (response.empty()) response.push_back(table.header.at(0));
  std::vector<int> resp_idx;
  for (const auto& name : response) resp_idx.push_back(column_index(table, name));

  Eigen::MatrixXd series(table.values.rows(), static_cast<Eigen::Index>(resp_idx.size()));
  for (std::size_t j = 0; j < resp_idx.size(); ++j) {
    series.col(static_cast<Eigen::Index>(j)) = table.values.col(resp_idx[j]);
  }
  if (opt.log_returns_pct) series = log_returns_pct(series);
  const int m = static_cast<int>(series.cols());
  const int rows = static_cast<int>(series.rows());

  if (opt.model == "linear") {
    if (m != 1) throw ConfigError("linear fits take a single response column");
    if (opt.regressors.empty()) throw ConfigError("linear fits need --regressors");
    if (opt.log_returns_pct) {
      throw ConfigError("--log-returns-pct applies to time-series models only");
    }
    ConditioningSpec cond =
        opt.conditioning.empty() ? ConditioningSpec{} : parse_conditioning(opt.conditioning);
    if (cond.lag_based()) throw ConfigError("linear fits need column-based conditioning");
    std::vector<std::string> cond_cols = cond.columns.empty() ? opt.regressors : cond.columns;

    const int r = static_cast<int>(opt.regressors.size());
    problem.sample.z.resize(rows, 1 + r);
    problem.sample.z.col(0) = series.col(0);
    for (int j = 0; j < r; ++j) {
      problem.sample.z.col(1 + j) = table.values.col(column_index(table, opt.regressors[j]));
    }
    problem.sample.x.resize(rows, static_cast<Eigen::Index>(cond_cols.size()));
    for (std::size_t j = 0; j < cond_cols.size(); ++j) {
      problem.sample.x.col(static_cast<Eigen::Index>(j)) =
          table.values.col(column_index(table, cond_cols[j]));
    }
    problem.model = opt.intercept ? linear_with_intercept(r) : linear_model(r);
    problem.description = opt.intercept ? "linear regression with intercept"
                                        : "linear regression through the origin";
    return problem;
  }

  // time-series models: ar, var, tar
  int p = opt.lags;
  if (p < 1) throw ConfigError("--lags must be positive");
  ConditioningSpec cond;
  if (!opt.conditioning.empty()) {
    cond = parse_conditioning(opt.conditioning);
  } else if (opt.model == "tar") {
    cond.lag_from = 1;
    cond.lag_to = 4;  // the default threshold-fit conditioning window
  } else {
    cond.lag_from = 1;
    cond.lag_to = p;
  }
  if (!cond.lag_based()) {
    throw ConfigError("time-series fits use lag-based conditioning (lags:A-B)");
  }

  int max_lag = std::max(p, cond.lag_to);
  if (opt.model == "tar") max_lag = std::max(max_lag, opt.threshold_lag);

  if (opt.model == "ar" || opt.model == "tar") {
    if (m != 1) throw ConfigError(opt.model + " fits take a single response column");
    if (rows - max_lag < 3) throw DataError("insufficient rows after lag construction");
    const int n = rows - max_lag;
    const int model_lag = opt.model == "tar" ? std::max(p, opt.threshold_lag) : p;
    problem.sample.z.resize(n, 1 + model_lag);
    problem.sample.x.resize(n, cond.lag_to - cond.lag_from + 1);
    for (int t = 0; t < n; ++t) {
      int row = max_lag + t;
      problem.sample.z(t, 0) = series(row, 0);
      for (int j = 1; j <= model_lag; ++j) problem.sample.z(t, j) = series(row - j, 0);
      for (int j = cond.lag_from; j <= cond.lag_to; ++j) {
        problem.sample.x(t, j - cond.lag_from) = series(row - j, 0);
      }
    }
    if (opt.model == "ar") {
      problem.model = ar_model(p, opt.intercept);
      problem.description = "AR(" + std::to_string(p) + ")";
    } else {
      problem.model = tar_model(p, opt.threshold_lag, opt.threshold);
      problem.description = "TAR(" + std::to_string(p) + "), threshold " +
                            std::to_string(opt.threshold) + " on lag " +
                            std::to_string(opt.threshold_lag);
    }
    return problem;
  }

  if (opt.model == "var") {
    if (m < 2) throw ConfigError("var fits need at least two response columns");
    if (rows - max_lag < 3) throw DataError("insufficient rows after lag construction");
    const int n = rows - max_lag;
    problem.sample.z.resize(n, m * (p + 1));
    problem.sample.x.resize(n, m * (cond.lag_to - cond.lag_from + 1));
    for (int t = 0; t < n; ++t) {
      int row = max_lag + t;
      for (int j = 0; j <= p; ++j) {
        problem.sample.z.block(t, j * m, 1, m) = series.row(row - j);
      }
      for (int j = cond.lag_from; j <= cond.lag_to; ++j) {
        problem.sample.x.block(t, (j - cond.lag_from) * m, 1, m) = series.row(row - j);
      }
    }
    problem.model = var_model(m, p, !opt.no_intercept);
    problem.description = "VAR(" + std::to_string(p) + ") on " + std::to_string(m) + " series";
    return problem;
  }

  throw ConfigError("unknown --model '" + opt.model + "' (linear | ar | var | tar)");
}

struct Coefficient {
  std::string name;
  double estimate;
  double std_error;
};

std::vector<Coefficient> reported_coefficients(const mddest::ResidualModel& model,
                                               const mddest::EstimateResult& result) {
  std::vector<Coefficient> out;
  Eigen::VectorXd est = result.theta_hat.theta;
  Eigen::MatrixXd vcov = result.vcov;
  std::vector<std::string> names = model.param_names;
  if (model.report_transform.size() > 0) {
    est = model.report_transform * est;
    vcov = model.report_transform * vcov * model.report_transform.transpose();
    names = model.report_names;
  }
  for (int i = 0; i < est.size(); ++i) {
    Coefficient c;
    c.name = i < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(i)]
                                                : "theta" + std::to_string(i);
    c.estimate = est[i];
    c.std_error = std::sqrt(std::max(0.0, vcov(i, i)));
    out.push_back(c);
  }
  return out;
}

void print_fit(const FitProblem& problem, const mddest::EstimateResult& result,
               const std::string& format) {
  auto coefs = reported_coefficients(problem.model, result);
  if (format == "json") {
    ordered_json doc;
    doc["model"] = problem.description;
    doc["estimator"] = mddest::to_string(result.method);
    doc["n"] = problem.sample.n();
    doc["converged"] = result.converged;
    doc["objective"] = result.objective_value;
    doc["iterations"] = result.iterations;
    ordered_json rows = ordered_json::array();
    for (const auto& c : coefs) {
      double t = c.std_error > 0.0 ? c.estimate / c.std_error : std::nan("");
      ordered_json row;
      row["name"] = c.name;
      row["estimate"] = c.estimate;
      row["std_error"] = c.std_error;
      row["t_stat"] = t;
      row["significant_5pct"] = std::abs(t) > 1.96;
      rows.push_back(std::move(row));
    }
    doc["coefficients"] = std::move(rows);
    if (!result.diagnostics.empty()) doc["diagnostics"] = result.diagnostics;
    std::cout << doc.dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    std::cout << "name,estimate,std_error,t_stat,significant_5pct\n";
    for (const auto& c : coefs) {
      double t = c.std_error > 0.0 ? c.estimate / c.std_error : std::nan("");
      std::cout << c.name << ',' << mddest::format_double(c.estimate) << ','
                << mddest::format_double(c.std_error) << ',' << mddest::format_double(t) << ','
                << (std::abs(t) > 1.96 ? 1 : 0) << "\n";
    }
    return;
  }
  std::printf("%s  [%s, n = %ld]\n", problem.description.c_str(),
              mddest::to_string(result.method).c_str(), static_cast<long>(problem.sample.n()));
  std::printf("%-18s %12s %12s %8s\n", "coefficient", "estimate", "std.error", "t");
  for (const auto& c : coefs) {
    double t = c.std_error > 0.0 ? c.estimate / c.std_error : std::nan("");
    const char* mark = std::abs(t) > 1.96 ? " *" : "";
    std::printf("%-18s %12.4f %12.4f %8.2f%s\n", c.name.c_str(), c.estimate, c.std_error, t,
                mark);
  }
  std::printf("objective %.6g, %s after %d iterations\n", result.objective_value,
              result.converged ? "converged" : "NOT converged", result.iterations);
  if (!result.diagnostics.empty()) std::printf("note: %s\n", result.diagnostics.c_str());
}

int cmd_fit(const FitOptions& opt) {
  using namespace mddest;
  CsvTable table;
  try {
    table = read_csv(opt.data_path);
  } catch (const CsvError& e) {
    throw DataError(e.what());
  }

  FitProblem problem = build_problem(opt, table);
  auto warnings = validate_sample(problem.sample, problem.model.d);
  for (const auto& w : warnings) std::cerr << "warning: " << w.message << "\n";
  if (problem.sample.n() < problem.model.d + 2) {
    throw DataError("insufficient rows: n = " + std::to_string(problem.sample.n()) +
                    " after lag construction, need at least d + 2 = " +
                    std::to_string(problem.model.d + 2));
  }

  OptimizerConfig config;
  config.seed = opt.seed;
  config.multistart = opt.multistart;
  config.max_iter = opt.max_iter;

  EstimateResult result;
  if (opt.estimator == "dl") {
    result = estimate_dl(problem.model, problem.sample, config);
  } else if (opt.estimator == "mdd") {
    if (problem.model.has_intercepts()) {
      result = estimate_two_step(problem.model, problem.sample, config);
    } else if (problem.model.affine) {
      result = closed_form_linear(problem.sample, problem.model.l, config);
    } else {
      result = estimate_mdd(problem.model, problem.sample, config);
    }
  } else {
    throw ConfigError("unknown --estimator '" + opt.estimator + "' (mdd | dl)");
  }

  print_fit(problem, result, opt.format);
  if (!result.converged) throw EstimationError("estimation did not converge");
  return 0;
}

mddest::ExperimentConfig experiment_from_json(const ordered_json& e, std::uint64_t default_seed) {
  using namespace mddest;
  ExperimentConfig config;
  if (!e.contains("dgp")) throw ConfigError("experiment config: missing required field 'dgp'");
  if (!e["dgp"].is_number_integer()) throw ConfigError("experiment config: 'dgp' must be an integer");
  config.dgp_id = e["dgp"].get<int>();
  if (!e.contains("replications")) {
    throw ConfigError("experiment config: missing required field 'replications'");
  }
  config.replications = e["replications"].get<int>();
  config.seed = e.value("seed", default_seed);
  if (e.contains("estimators")) {
    config.estimators.clear();
    for (const auto& name : e["estimators"]) {
      std::string s = name.get<std::string>();
      if (s == "mdd") {
        config.estimators.push_back(EstimatorKind::Mdd);
      } else if (s == "dl") {
        config.estimators.push_back(EstimatorKind::Dl);
      } else {
        throw ConfigError("experiment config: unknown estimator '" + s + "'");
      }
    }
  }
  return config;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, int jobs) {
  using namespace mddest;
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }

  std::uint64_t default_seed = doc.value("seed", 0ULL);
  if (seed_override) default_seed = *seed_override;
  std::vector<ordered_json> experiments;
  if (doc.contains("experiments")) {
    for (const auto& e : doc["experiments"]) experiments.push_back(e);
  } else {
    experiments.push_back(doc);
  }

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  for (const auto& e : experiments) {
    ExperimentConfig base = experiment_from_json(e, default_seed);
    if (seed_override) base.seed = *seed_override;
    base.jobs = jobs;
    std::vector<int> sizes;
    if (!e.contains("n")) throw ConfigError("experiment config: missing required field 'n'");
    if (e["n"].is_array()) {
      for (const auto& v : e["n"]) sizes.push_back(v.get<int>());
    } else {
      sizes.push_back(e["n"].get<int>());
    }

    std::vector<McSummary> all;
    for (int n : sizes) {
      ExperimentConfig config = base;
      config.n = n;
      auto summaries = run_experiment(config);
      all.insert(all.end(), summaries.begin(), summaries.end());
    }
    std::cout << emit_table(all, TableFormat::TextGrid);
    if (!out_dir.empty()) {
      std::string stem = out_dir + "/dgp" + std::to_string(base.dgp_id);
      std::ofstream csv(stem + ".csv", std::ios::binary);
      csv << emit_table(all, TableFormat::Csv);
      std::ofstream json_out(stem + ".json", std::ios::binary);
      json_out << emit_table(all, TableFormat::Json);
    }
  }
  return 0;
}

int cmd_dump(int dgp, int n, std::uint64_t seed, const std::string& out_path) {
  using namespace mddest;
  GeneratedData data = generate({dgp, n, seed, 200});
  CsvTable table;
  table.header = data.raw_names;
  table.values = data.raw;
  if (out_path.empty() || out_path == "-") {
    std::cout << format_csv(table);
  } else {
    write_csv(out_path, table);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional moment model estimation via pairwise-distance objectives"};
  app.require_subcommand(1);

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model to CSV data");
  fit_cmd->add_option("--data", fit.data_path, "CSV file (header row, numeric cells)")
      ->required();
  fit_cmd->add_option("--model", fit.model, "linear | ar | var | tar");
  fit_cmd->add_option("--response", fit.response, "response column name(s)")->delimiter(',');
  fit_cmd->add_option("--regressors", fit.regressors, "regressor columns (linear model)")
      ->delimiter(',');
  fit_cmd->add_option("--lags", fit.lags, "autoregressive order p");
  fit_cmd->add_option("--threshold-lag", fit.threshold_lag, "TAR threshold variable lag");
  fit_cmd->add_option("--threshold", fit.threshold, "TAR threshold value");
  fit_cmd->add_flag("--intercept", fit.intercept, "include an intercept (linear/ar)");
  fit_cmd->add_flag("--no-intercept", fit.no_intercept, "drop the VAR intercept");
  fit_cmd->add_option("--conditioning", fit.conditioning,
                      "conditioning set: lags:A-B or column names");
  fit_cmd->add_option("--estimator", fit.estimator, "mdd | dl");
  fit_cmd->add_option("--seed", fit.seed, "optimizer multistart seed");
  fit_cmd->add_option("--format", fit.format, "text | csv | json");
  fit_cmd->add_flag("--log-returns-pct", fit.log_returns_pct,
                    "transform responses to 100 * diff(log)");
  fit_cmd->add_option("--multistart", fit.multistart, "number of optimizer starts");
  fit_cmd->add_option("--max-iter", fit.max_iter, "optimizer iteration cap");

  std::string sim_config, sim_out_dir;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  int sim_jobs = 0;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run simulation experiments from a config");
  sim_cmd->add_option("--config", sim_config, "JSON experiment config")->required();
  sim_cmd->add_option("--out-dir", sim_out_dir, "write csv/json tables here");
  sim_cmd->add_option("--seed", sim_seed, "override the config master seed")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim_cmd->add_option("--jobs", sim_jobs, "parallel workers (0 = all cores)");

  int dump_dgp = 1, dump_n = 200;
  std::uint64_t dump_seed = 0;
  std::string dump_out;
  CLI::App* dump_cmd = app.add_subcommand("dump", "Write a generated sample as CSV");
  dump_cmd->add_option("--dgp", dump_dgp, "design id 1..16")->required();
  dump_cmd->add_option("--n", dump_n, "sample size");
  dump_cmd->add_option("--seed", dump_seed, "generator seed");
  dump_cmd->add_option("--out", dump_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim_config, sim_out_dir,
                          sim_seed_set ? std::optional<std::uint64_t>(sim_seed) : std::nullopt,
                          sim_jobs);
    }
    if (dump_cmd->parsed()) return cmd_dump(dump_dgp, dump_n, dump_seed, dump_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const mddest::CsvError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitEstimation;
  }
  return 0;
}
