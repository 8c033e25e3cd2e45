#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "listpolar/diagnostics.hpp"
#include "listpolar/dgp.hpp"
#include "listpolar/estimators.hpp"
#include "listpolar/io.hpp"

namespace listpolar {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for one replicate. Each mixing step is a bijection of the previous
/// state, so distinct rep indices always map to distinct seeds.
inline std::uint64_t derive_rep_seed(std::uint64_t master_seed, std::string_view scenario_id,
                                     std::uint64_t rep_index) {
  const std::uint64_t s = splitmix64(splitmix64(master_seed) ^ fnv1a64(scenario_id));
  return splitmix64(s ^ rep_index);
}

struct RepRecord {
  std::string scenario_id;
  PolarityMode polarity_mode = PolarityMode::OppositePolarity;
  CovariateMode covariate_mode = CovariateMode::SameEffect;
  double group_b_share = 0.0;
  std::size_t rep_index = 0;
  std::uint64_t seed = 0;
  double dim_estimate = 0.0;
  double direct_estimate = 0.0;
  double sensitivity_bias_estimate = 0.0;
  double standard_ml_prevalence = 0.0;
  double combined_ml_prevalence = 0.0;
  std::array<double, 4> standard_ml_delta{};
  std::array<double, 4> combined_ml_delta{};
  double placebo_p = std::numeric_limits<double>::quiet_NaN();  // NaN when inapplicable
  bool ml_converged = false;
  bool cml_converged = false;
  // Realized mean(z) - mean(d): the sensitivity bias the estimator targets.
  double true_sens_bias = 0.0;
};

struct RunOptions {
  std::size_t jobs = 1;
  FitOptions fit;
};

/// Runs every estimator and diagnostic on one generated dataset. Floats are
/// rounded to their CSV representation so persisted records reproduce exactly.
inline RepRecord run_replicate(const ScenarioConfig& cfg, std::uint64_t master_seed,
                               std::size_t rep_index, const FitOptions& fit = {}) {
  RepRecord rec;
  rec.scenario_id = cfg.scenario_id;
  rec.polarity_mode = cfg.polarity_mode;
  rec.covariate_mode = cfg.covariate_mode;
  rec.group_b_share = cfg.group_b_share;
  rec.rep_index = rep_index;
  rec.seed = derive_rep_seed(master_seed, cfg.scenario_id, rep_index);

  ScenarioConfig plain = cfg;
  plain.append_zero_item = false;
  const Dataset ds = generate_dataset(plain, rec.seed);

  rec.dim_estimate = estimate_dim(ds).estimate;
  rec.direct_estimate = estimate_direct_prevalence(ds).estimate;
  rec.sensitivity_bias_estimate = estimate_sensitivity_bias(ds).estimate;

  const MlFit ml = estimate_standard_ml(ds, fit);
  rec.standard_ml_prevalence = ml.prevalence;
  std::copy(ml.delta.begin(), ml.delta.end(), rec.standard_ml_delta.begin());
  rec.ml_converged = ml.converged;

  const MlFit cml = estimate_combined_ml(with_zero_item(ds), fit);
  rec.combined_ml_prevalence = cml.prevalence;
  std::copy(cml.delta.begin(), cml.delta.end(), rec.combined_ml_delta.begin());
  rec.cml_converged = cml.converged;

  try {
    rec.placebo_p = placebo_test(ds).p_value;
  } catch (const TestInapplicable&) {
    rec.placebo_p = std::numeric_limits<double>::quiet_NaN();
  }

  double z_sum = 0.0;
  double d_sum = 0.0;
  for (const Respondent& r : ds.respondents) {
    z_sum += r.z;
    d_sum += r.d;
  }
  rec.true_sens_bias = (z_sum - d_sum) / static_cast<double>(ds.size());

  for (double* v : {&rec.dim_estimate, &rec.direct_estimate, &rec.sensitivity_bias_estimate,
                    &rec.standard_ml_prevalence, &rec.combined_ml_prevalence, &rec.placebo_p,
                    &rec.true_sens_bias}) {
    *v = csv::round_g9(*v);
  }
  for (double& v : rec.standard_ml_delta) v = csv::round_g9(v);
  for (double& v : rec.combined_ml_delta) v = csv::round_g9(v);
  return rec;
}

/// Calls fn(i) for i in [0, n) on `jobs` worker threads. The first exception
/// thrown by any task is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<RepRecord> run_scenario(const ScenarioConfig& cfg, std::size_t reps,
                                           std::uint64_t master_seed,
                                           const RunOptions& opts = {}) {
  validate(cfg);
  std::vector<RepRecord> records(reps);
  parallel_for(reps, opts.jobs,
               [&](std::size_t i) { records[i] = run_replicate(cfg, master_seed, i, opts.fit); });
  return records;
}

/// The full polarity x covariate x share grid, calibrated once per effect sign.
inline std::vector<ScenarioConfig> default_grid() {
  ScenarioConfig same;
  same.covariate_mode = CovariateMode::SameEffect;
  calibrate(same);
  ScenarioConfig opposite;
  opposite.covariate_mode = CovariateMode::OppositeEffect;
  calibrate(opposite);

  std::vector<ScenarioConfig> grid;
  for (PolarityMode p : {PolarityMode::OppositePolarity, PolarityMode::NonSensitiveB}) {
    for (const ScenarioConfig* base : {&same, &opposite}) {
      for (double share : default_shares()) {
        ScenarioConfig cfg = *base;
        cfg.polarity_mode = p;
        cfg.group_b_share = share;
        cfg.scenario_id = make_scenario_id(p, cfg.covariate_mode, share);
        grid.push_back(std::move(cfg));
      }
    }
  }
  return grid;
}

using RecordSink = std::function<void(const RepRecord&)>;

/// Runs each scenario in order and streams its records, sorted by rep index.
inline void run_grid(const std::vector<ScenarioConfig>& scenarios, std::size_t reps,
                     std::uint64_t master_seed, const RunOptions& opts, const RecordSink& sink) {
  for (const ScenarioConfig& cfg : scenarios) {
    for (const RepRecord& r : run_scenario(cfg, reps, master_seed, opts)) sink(r);
  }
}

inline void run_grid(std::uint64_t master_seed, std::size_t reps, const RunOptions& opts,
                     const RecordSink& sink) {
  run_grid(default_grid(), reps, master_seed, opts, sink);
}

// ---------------------------------------------------------------------------
// Results CSV

inline constexpr std::string_view kRecordHeader =
    "scenario_id,polarity_mode,covariate_mode,group_b_share,rep,seed,dim,direct,sens_bias,"
    "ml_prev,cml_prev,ml_b0,ml_b1,ml_b2,ml_b3,cml_b0,cml_b1,cml_b2,cml_b3,placebo_p,ml_conv,"
    "cml_conv,true_sens_bias";

inline void write_record_header(std::ostream& os) { os << kRecordHeader << '\n'; }

inline void write_record(std::ostream& os, const RepRecord& r) {
  using csv::format_g9;
  os << r.scenario_id << ',' << to_string(r.polarity_mode) << ',' << to_string(r.covariate_mode)
     << ',' << format_g9(r.group_b_share) << ',' << r.rep_index << ',' << r.seed << ','
     << format_g9(r.dim_estimate) << ',' << format_g9(r.direct_estimate) << ','
     << format_g9(r.sensitivity_bias_estimate) << ',' << format_g9(r.standard_ml_prevalence)
     << ',' << format_g9(r.combined_ml_prevalence);
  for (double v : r.standard_ml_delta) os << ',' << format_g9(v);
  for (double v : r.combined_ml_delta) os << ',' << format_g9(v);
  os << ',' << format_g9(r.placebo_p) << ',' << (r.ml_converged ? 1 : 0) << ','
     << (r.cml_converged ? 1 : 0) << ',' << format_g9(r.true_sens_bias) << '\n';
}

inline std::vector<RepRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || csv::strip_cr(line) != kRecordHeader) {
    throw InputError("line 1: records header does not match the results schema");
  }
  std::vector<RepRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 23) throw InputError(csv::line_prefix(line_no) + "expected 23 fields");
    RepRecord r;
    r.scenario_id = f[0];
    r.polarity_mode = parse_polarity_mode(f[1]);
    r.covariate_mode = parse_covariate_mode(f[2]);
    r.group_b_share = csv::parse_double(f[3], line_no);
    r.rep_index = csv::parse_int<std::size_t>(f[4], line_no);
    r.seed = csv::parse_int<std::uint64_t>(f[5], line_no);
    r.dim_estimate = csv::parse_double(f[6], line_no);
    r.direct_estimate = csv::parse_double(f[7], line_no);
    r.sensitivity_bias_estimate = csv::parse_double(f[8], line_no);
    r.standard_ml_prevalence = csv::parse_double(f[9], line_no);
    r.combined_ml_prevalence = csv::parse_double(f[10], line_no);
    for (std::size_t k = 0; k < 4; ++k) {
      r.standard_ml_delta[k] = csv::parse_double(f[11 + k], line_no);
      r.combined_ml_delta[k] = csv::parse_double(f[15 + k], line_no);
    }
    r.placebo_p = csv::parse_double(f[19], line_no);
    r.ml_converged = csv::parse_binary(f[20], line_no, "ml_conv") == 1;
    r.cml_converged = csv::parse_binary(f[21], line_no, "cml_conv") == 1;
    r.true_sens_bias = csv::parse_double(f[22], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct MeanSe {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double mcse = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

/// Mean and Monte Carlo standard error (sample sd / sqrt(n)) of the finite values.
inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  double sum = 0.0;
  for (double x : xs) {
    if (std::isfinite(x)) {
      sum += x;
      ++out.n;
    }
  }
  if (out.n == 0) return out;
  out.mean = sum / static_cast<double>(out.n);
  double ss = 0.0;
  for (double x : xs) {
    if (std::isfinite(x)) ss += (x - out.mean) * (x - out.mean);
  }
  const double sd = out.n > 1 ? std::sqrt(ss / static_cast<double>(out.n - 1)) : 0.0;
  out.mcse = sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

struct ScenarioSummary {
  std::string scenario_id;
  PolarityMode polarity_mode = PolarityMode::OppositePolarity;
  CovariateMode covariate_mode = CovariateMode::SameEffect;
  double group_b_share = 0.0;
  std::size_t reps = 0;
  MeanSe dim_bias;
  MeanSe direct_bias;
  MeanSe ml_prev_bias;
  MeanSe cml_prev_bias;
  MeanSe ml_b2_bias;
  MeanSe cml_b2_bias;
  MeanSe sens_bias;       // the estimate itself
  MeanSe sens_bias_bias;  // estimate minus realized truth
  double rejection_rate = std::numeric_limits<double>::quiet_NaN();
  double placebo_p_mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t placebo_n = 0;
  double ml_conv_rate = 0.0;
  double cml_conv_rate = 0.0;
};

inline constexpr double kRejectionLevel = 0.05;

/// One summary per scenario, in order of first appearance; records within a
/// scenario are sorted by rep index first.
inline std::vector<ScenarioSummary> aggregate(std::vector<RepRecord> records,
                                              double reference_beta = 1.0,
                                              double true_prevalence = 0.25) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RepRecord>> groups;
  for (auto& r : records) {
    auto [it, inserted] = groups.try_emplace(r.scenario_id);
    if (inserted) order.push_back(r.scenario_id);
    it->second.push_back(std::move(r));
  }

  std::vector<ScenarioSummary> out;
  for (const auto& id : order) {
    auto& recs = groups[id];
    std::stable_sort(recs.begin(), recs.end(),
                     [](const RepRecord& a, const RepRecord& b) { return a.rep_index < b.rep_index; });
    ScenarioSummary s;
    s.scenario_id = id;
    s.polarity_mode = recs.front().polarity_mode;
    s.covariate_mode = recs.front().covariate_mode;
    s.group_b_share = recs.front().group_b_share;
    s.reps = recs.size();

    auto collect = [&](auto&& value) {
      std::vector<double> xs;
      xs.reserve(recs.size());
      for (const auto& r : recs) xs.push_back(value(r));
      return mean_se(xs);
    };
    s.dim_bias = collect([&](const RepRecord& r) { return r.dim_estimate - true_prevalence; });
    s.direct_bias = collect([&](const RepRecord& r) { return r.direct_estimate - true_prevalence; });
    s.ml_prev_bias =
        collect([&](const RepRecord& r) { return r.standard_ml_prevalence - true_prevalence; });
    s.cml_prev_bias =
        collect([&](const RepRecord& r) { return r.combined_ml_prevalence - true_prevalence; });
    s.ml_b2_bias = collect([&](const RepRecord& r) { return r.standard_ml_delta[2] - reference_beta; });
    s.cml_b2_bias = collect([&](const RepRecord& r) { return r.combined_ml_delta[2] - reference_beta; });
    s.sens_bias = collect([](const RepRecord& r) { return r.sensitivity_bias_estimate; });
    s.sens_bias_bias =
        collect([](const RepRecord& r) { return r.sensitivity_bias_estimate - r.true_sens_bias; });

    std::size_t rejections = 0;
    double p_sum = 0.0;
    std::size_t ml_conv = 0;
    std::size_t cml_conv = 0;
    for (const auto& r : recs) {
      if (std::isfinite(r.placebo_p)) {
        ++s.placebo_n;
        p_sum += r.placebo_p;
        rejections += r.placebo_p < kRejectionLevel;
      }
      ml_conv += r.ml_converged;
      cml_conv += r.cml_converged;
    }
    if (s.placebo_n > 0) {
      s.rejection_rate = static_cast<double>(rejections) / static_cast<double>(s.placebo_n);
      s.placebo_p_mean = p_sum / static_cast<double>(s.placebo_n);
    }
    s.ml_conv_rate = static_cast<double>(ml_conv) / static_cast<double>(s.reps);
    s.cml_conv_rate = static_cast<double>(cml_conv) / static_cast<double>(s.reps);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary CSV

inline constexpr std::string_view kSummaryHeader =
    "scenario_id,polarity_mode,covariate_mode,group_b_share,reps,dim_bias,dim_mcse,direct_bias,"
    "direct_mcse,ml_prev_bias,ml_prev_mcse,cml_prev_bias,cml_prev_mcse,ml_b2_bias,ml_b2_mcse,"
    "cml_b2_bias,cml_b2_mcse,sens_bias_mean,sens_bias_mcse,sens_bias_bias,sens_bias_bias_mcse,"
    "rejection_rate,placebo_p_mean,placebo_n,ml_conv_rate,cml_conv_rate";

inline void write_summary_csv(std::ostream& os, const std::vector<ScenarioSummary>& rows) {
  using csv::format_g9;
  os << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    os << s.scenario_id << ',' << to_string(s.polarity_mode) << ',' << to_string(s.covariate_mode)
       << ',' << format_g9(s.group_b_share) << ',' << s.reps;
    for (const MeanSe* m : {&s.dim_bias, &s.direct_bias, &s.ml_prev_bias, &s.cml_prev_bias,
                            &s.ml_b2_bias, &s.cml_b2_bias, &s.sens_bias, &s.sens_bias_bias}) {
      os << ',' << format_g9(m->mean) << ',' << format_g9(m->mcse);
    }
    os << ',' << format_g9(s.rejection_rate) << ',' << format_g9(s.placebo_p_mean) << ','
       << s.placebo_n << ',' << format_g9(s.ml_conv_rate) << ',' << format_g9(s.cml_conv_rate)
       << '\n';
  }
}

inline std::vector<ScenarioSummary> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || csv::strip_cr(line) != kSummaryHeader) {
    throw InputError("line 1: summary header does not match the summary schema");
  }
  std::vector<ScenarioSummary> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 26) throw InputError(csv::line_prefix(line_no) + "expected 26 fields");
    ScenarioSummary s;
    s.scenario_id = f[0];
    s.polarity_mode = parse_polarity_mode(f[1]);
    s.covariate_mode = parse_covariate_mode(f[2]);
    s.group_b_share = csv::parse_double(f[3], line_no);
    s.reps = csv::parse_int<std::size_t>(f[4], line_no);
    std::size_t k = 5;
    for (MeanSe* m : {&s.dim_bias, &s.direct_bias, &s.ml_prev_bias, &s.cml_prev_bias,
                      &s.ml_b2_bias, &s.cml_b2_bias, &s.sens_bias, &s.sens_bias_bias}) {
      m->mean = csv::parse_double(f[k++], line_no);
      m->mcse = csv::parse_double(f[k++], line_no);
      m->n = s.reps;
    }
    s.rejection_rate = csv::parse_double(f[21], line_no);
    s.placebo_p_mean = csv::parse_double(f[22], line_no);
    s.placebo_n = csv::parse_int<std::size_t>(f[23], line_no);
    s.ml_conv_rate = csv::parse_double(f[24], line_no);
    s.cml_conv_rate = csv::parse_double(f[25], line_no);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace listpolar
