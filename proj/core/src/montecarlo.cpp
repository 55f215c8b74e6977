#include "mddest/montecarlo.hpp"

#include "mddest/csv.hpp"
#include "mddest/estimators.hpp"
#include "mddest/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mddest {

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::Mdd ? "mdd" : "dl";
}

namespace {

struct RepOutcome {
  bool ok = false;
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
};

RepOutcome estimate_once(const GeneratedData& data, EstimatorKind kind,
                         OptimizerConfig optimizer) {
  RepOutcome out;
  try {
    EstimateResult res;
    if (kind == EstimatorKind::Dl) {
      res = estimate_dl(data.model, data.sample, optimizer);
    } else {
      switch (data.mdd_route) {
        case EstimatorMethod::MddTwoStep:
          res = estimate_two_step(data.model, data.sample, optimizer);
          break;
        case EstimatorMethod::MddClosedForm:
          res = closed_form_linear(data.sample, data.model.l, optimizer);
          break;
        default:
          res = estimate_mdd(data.model, data.sample, optimizer);
          break;
      }
    }
    if (!res.converged || !res.theta_hat.theta.allFinite() || !res.std_errors.allFinite()) {
      return out;
    }
    out.ok = true;
    if (data.model.report_transform.size() > 0) {
      const Eigen::MatrixXd& tr = data.model.report_transform;
      out.theta = tr * res.theta_hat.theta;
      out.se = (tr * res.vcov * tr.transpose()).diagonal().cwiseSqrt();
    } else {
      out.theta = res.theta_hat.theta;
      out.se = res.std_errors;
    }
  } catch (const std::exception&) {
    // failed replication: counted, never fatal for the experiment
  }
  return out;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

}  // namespace

std::vector<McSummary> run_experiment(const ExperimentConfig& config) {
  if (config.replications < 2) {
    throw std::invalid_argument("run_experiment: need at least 2 replications");
  }
  if (config.estimators.empty()) {
    throw std::invalid_argument("run_experiment: no estimators requested");
  }

  const int reps = config.replications;
  const std::size_t n_est = config.estimators.size();
  std::vector<std::vector<RepOutcome>> outcomes(
      n_est, std::vector<RepOutcome>(static_cast<std::size_t>(reps)));
  std::vector<double> elapsed(n_est, 0.0);

  GeneratedData probe = generate({config.dgp_id, config.n, config.seed, config.burn_in});
  const int d = probe.model.d;

  auto started = std::chrono::steady_clock::now();
  parallel_for(reps, config.jobs, [&](int r) {
    DgpSpec spec{config.dgp_id, config.n,
                 derive_stream(config.seed, static_cast<std::uint64_t>(r), 0x7265706cULL),
                 config.burn_in};
    GeneratedData data = generate(spec);
    for (std::size_t e = 0; e < n_est; ++e) {
      OptimizerConfig opt = config.optimizer;
      opt.seed = derive_stream(spec.seed, 0x6f7074ULL, static_cast<std::uint64_t>(e));
      outcomes[e][static_cast<std::size_t>(r)] = estimate_once(data, config.estimators[e], opt);
    }
  });
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::vector<McSummary> summaries;
  for (std::size_t e = 0; e < n_est; ++e) {
    McSummary summary;
    summary.dgp_id = config.dgp_id;
    summary.n = config.n;
    summary.estimator = config.estimators[e];
    summary.replications = reps;
    summary.seed = config.seed;
    summary.elapsed_seconds = wall;

    // Ordered reduction over the replication index keeps the aggregate
    // bit-identical for any worker count.
    int converged = 0;
    Eigen::VectorXd mean_theta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd mean_se = Eigen::VectorXd::Zero(d);
    for (int r = 0; r < reps; ++r) {
      const RepOutcome& o = outcomes[e][static_cast<std::size_t>(r)];
      if (!o.ok) continue;
      ++converged;
      mean_theta += o.theta;
      mean_se += o.se;
    }
    summary.converged = converged;
    if (converged > 0) {
      mean_theta /= static_cast<double>(converged);
      mean_se /= static_cast<double>(converged);
    }
    Eigen::VectorXd ssq = Eigen::VectorXd::Zero(d);
    for (int r = 0; r < reps; ++r) {
      const RepOutcome& o = outcomes[e][static_cast<std::size_t>(r)];
      if (!o.ok) continue;
      ssq += (o.theta - mean_theta).cwiseAbs2();
    }

    for (int i = 0; i < d; ++i) {
      ParamSummary p;
      p.name = i < static_cast<int>(probe.model.param_names.size())
                   ? probe.model.param_names[static_cast<std::size_t>(i)]
                   : "theta" + std::to_string(i);
      p.truth = probe.truth.theta[i];
      p.bias = converged > 0 ? mean_theta[i] - p.truth : std::nan("");
      p.asd = converged > 0 ? mean_se[i] : std::nan("");
      p.esd = converged > 1 ? std::sqrt(ssq[i] / static_cast<double>(converged - 1))
                            : std::nan("");
      summary.params.push_back(std::move(p));
    }
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

namespace {

const char* kCsvHeader = "estimator,parameter,n,bias,asd,esd,dgp,truth,replications,converged,seed";

std::string csv_rows(const std::vector<McSummary>& summaries) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const auto& s : summaries) {
    for (const auto& p : s.params) {
      os << to_string(s.estimator) << ',' << p.name << ',' << s.n << ','
         << format_double(p.bias) << ',' << format_double(p.asd) << ','
         << format_double(p.esd) << ',' << s.dgp_id << ',' << format_double(p.truth) << ','
         << s.replications << ',' << s.converged << ',' << s.seed << "\n";
    }
  }
  return os.str();
}

std::string json_rows(const std::vector<McSummary>& summaries) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    for (const auto& p : s.params) {
      nlohmann::ordered_json row;
      row["estimator"] = to_string(s.estimator);
      row["parameter"] = p.name;
      row["n"] = s.n;
      row["bias"] = format_double(p.bias);
      row["asd"] = format_double(p.asd);
      row["esd"] = format_double(p.esd);
      row["dgp"] = s.dgp_id;
      row["truth"] = format_double(p.truth);
      row["replications"] = s.replications;
      row["converged"] = s.converged;
      row["seed"] = s.seed;
      rows.push_back(std::move(row));
    }
  }
  return rows.dump(2) + "\n";
}

std::string fixed3(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string text_grid(const std::vector<McSummary>& summaries) {
  // Pivot: one block per DGP, one row per estimator x parameter, the n
  // values side by side with bias/asd/esd columns.
  std::vector<int> ns;
  for (const auto& s : summaries) {
    if (std::find(ns.begin(), ns.end(), s.n) == ns.end()) ns.push_back(s.n);
  }
  std::sort(ns.begin(), ns.end());

  std::ostringstream os;
  std::vector<int> dgps;
  for (const auto& s : summaries) {
    if (std::find(dgps.begin(), dgps.end(), s.dgp_id) == dgps.end()) dgps.push_back(s.dgp_id);
  }

  for (int dgp : dgps) {
    os << "DGP " << dgp << "\n";
    os << "  " << std::string(24, ' ');
    for (int n : ns) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%-26s", ("n=" + std::to_string(n)).c_str());
      os << buf;
    }
    os << "\n";
    os << "  estimator  parameter   ";
    for (std::size_t i = 0; i < ns.size(); ++i) os << "bias     asd      esd       ";
    os << "\n";

    std::vector<std::pair<EstimatorKind, std::string>> rows;
    for (const auto& s : summaries) {
      if (s.dgp_id != dgp) continue;
      for (const auto& p : s.params) {
        auto key = std::make_pair(s.estimator, p.name);
        if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
      }
    }
    for (const auto& [kind, name] : rows) {
      char head[64];
      std::snprintf(head, sizeof(head), "  %-10s %-11s ", to_string(kind).c_str(),
                    name.c_str());
      os << head;
      for (int n : ns) {
        const ParamSummary* found = nullptr;
        for (const auto& s : summaries) {
          if (s.dgp_id != dgp || s.n != n || s.estimator != kind) continue;
          for (const auto& p : s.params) {
            if (p.name == name) found = &p;
          }
        }
        if (found) {
          char cell[96];
          std::snprintf(cell, sizeof(cell), "%-8s %-8s %-8s  ", fixed3(found->bias).c_str(),
                        fixed3(found->asd).c_str(), fixed3(found->esd).c_str());
          os << cell;
        } else {
          os << std::string(28, ' ');
        }
      }
      os << "\n";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::string emit_table(const std::vector<McSummary>& summaries, TableFormat format) {
  switch (format) {
    case TableFormat::Csv: return csv_rows(summaries);
    case TableFormat::Json: return json_rows(summaries);
    case TableFormat::TextGrid: return text_grid(summaries);
  }
  throw std::invalid_argument("emit_table: unknown format");
}

std::vector<McSummary> parse_table_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::invalid_argument("parse_table_csv: unexpected header");
  }
  std::vector<McSummary> summaries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw std::invalid_argument("parse_table_csv: bad row '" + line + "'");
    }
    ParamSummary p;
    p.name = cells[1];
    p.bias = std::stod(cells[3]);
    p.asd = std::stod(cells[4]);
    p.esd = std::stod(cells[5]);
    p.truth = std::stod(cells[7]);

    EstimatorKind kind = cells[0] == "mdd" ? EstimatorKind::Mdd : EstimatorKind::Dl;
    int n = std::stoi(cells[2]);
    int dgp = std::stoi(cells[6]);
    int reps = std::stoi(cells[8]);
    int converged = std::stoi(cells[9]);
    std::uint64_t seed = std::stoull(cells[10]);

    McSummary* target = nullptr;
    if (!summaries.empty()) {
      McSummary& back = summaries.back();
      if (back.estimator == kind && back.n == n && back.dgp_id == dgp && back.seed == seed) {
        target = &back;
      }
    }
    if (target == nullptr) {
      McSummary s;
      s.dgp_id = dgp;
      s.n = n;
      s.estimator = kind;
      s.replications = reps;
      s.converged = converged;
      s.seed = seed;
      summaries.push_back(std::move(s));
      target = &summaries.back();
    }
    target->params.push_back(std::move(p));
  }
  return summaries;
}

bool summaries_equivalent(const std::vector<McSummary>& a, const std::vector<McSummary>& b) {
  if (a.size() != b.size()) return false;
  auto same = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    const McSummary& u = a[i];
    const McSummary& v = b[i];
    if (u.dgp_id != v.dgp_id || u.n != v.n || u.estimator != v.estimator ||
        u.replications != v.replications || u.converged != v.converged || u.seed != v.seed ||
        u.params.size() != v.params.size()) {
      return false;
    }
    for (std::size_t j = 0; j < u.params.size(); ++j) {
      const ParamSummary& p = u.params[j];
      const ParamSummary& q = v.params[j];
      if (p.name != q.name || !same(p.truth, q.truth) || !same(p.bias, q.bias) ||
          !same(p.asd, q.asd) || !same(p.esd, q.esd)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace mddest
