#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dci/discrete_regression.hpp"
#include "dci/errors.hpp"
#include "dci/inference.hpp"
#include "dci/parallel.hpp"
#include "dci/rng.hpp"
#include "dci/synthetic.hpp"
#include "dci/version.hpp"

#include <json.hpp>

namespace dci {

struct ExperimentConfig {
  std::string family = "anm";  // anm | reference_set | real_pairs

  // anm family
  int x_size = 30;
  int y0_size = 30;
  std::vector<std::pair<int, int>> noise_domains = {{0, 1}, {-1, 1}, {-2, 2}, {-3, 3}};

  // reference_set family
  std::vector<std::pair<int, int>> domain_sizes = {{12, 12}, {15, 15}, {18, 18}, {20, 20}};
  int reference_count = 0;  // 0 = y_size/4

  // shared protocol
  std::vector<std::size_t> sample_sizes = {200, 300, 500, 1000, 2000, 4000};
  int models_per_setting = 100;
  double epsilon = 0.0;
  std::vector<std::string> methods = {"dc", "dr"};
  std::uint64_t master_seed = 987654321;
  double alpha = 0.05;
  bool dr_forced = true;
  int permutations = 1000;
  unsigned workers = 0;  // 0 = hardware concurrency

  // threshold study
  std::vector<double> epsilons = {0.01, 0.05, 0.1};
  std::size_t threshold_sample_size = 4000;

  // decision-rate curve
  std::size_t decision_rate_sample_size = 5000;
  std::vector<int> rate_grid_percent = {5,  10, 15, 20, 25, 30, 35, 40, 45, 50,
                                        55, 60, 65, 70, 75, 80, 85, 90, 95, 100};

  // timing
  int timing_repetitions = 100;
  int timing_models = 3;

  // real pairs
  std::string pairs_dir;
  std::string meta_file;
  int replicates = 50;
  std::string resample = "bootstrap";  // bootstrap | subsample
  std::vector<int> excluded_pairs = {17, 44, 45, 52, 53, 54, 55, 68, 71, 75};
  std::vector<int> scale100_pairs = {65, 66, 67};
  std::pair<int, int> pair_columns = {0, 1};
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.family != "anm" && cfg.family != "reference_set" && cfg.family != "real_pairs")
    throw config_error("unknown family: " + cfg.family);
  if (cfg.sample_sizes.empty()) throw config_error("sample_sizes must be nonempty");
  for (auto n : cfg.sample_sizes)
    if (n < 1) throw config_error("sample sizes must be >= 1");
  if (cfg.models_per_setting < 1) throw config_error("models_per_setting must be >= 1");
  if (cfg.epsilon < 0.0) throw config_error("epsilon must be nonnegative");
  if (cfg.methods.empty()) throw config_error("methods must be nonempty");
  for (const auto& m : cfg.methods)
    if (m != "dc" && m != "dr") throw config_error("unknown method: " + m);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw config_error("alpha must be in (0,1)");
  if (cfg.permutations < 1) throw config_error("permutations must be >= 1");
  if (cfg.replicates < 1) throw config_error("replicates must be >= 1");
  if (cfg.resample != "bootstrap" && cfg.resample != "subsample")
    throw config_error("resample must be bootstrap or subsample");
  for (int r : cfg.rate_grid_percent)
    if (r < 1 || r > 100) throw config_error("rate grid entries must be in [1,100]");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{
      {"family", c.family},
      {"x_size", c.x_size},
      {"y0_size", c.y0_size},
      {"noise_domains", c.noise_domains},
      {"domain_sizes", c.domain_sizes},
      {"reference_count", c.reference_count},
      {"sample_sizes", c.sample_sizes},
      {"models_per_setting", c.models_per_setting},
      {"epsilon", c.epsilon},
      {"methods", c.methods},
      {"master_seed", c.master_seed},
      {"alpha", c.alpha},
      {"dr_forced", c.dr_forced},
      {"permutations", c.permutations},
      {"workers", c.workers},
      {"epsilons", c.epsilons},
      {"threshold_sample_size", c.threshold_sample_size},
      {"decision_rate_sample_size", c.decision_rate_sample_size},
      {"rate_grid_percent", c.rate_grid_percent},
      {"timing_repetitions", c.timing_repetitions},
      {"timing_models", c.timing_models},
      {"pairs_dir", c.pairs_dir},
      {"meta_file", c.meta_file},
      {"replicates", c.replicates},
      {"resample", c.resample},
      {"excluded_pairs", c.excluded_pairs},
      {"scale100_pairs", c.scale100_pairs},
      {"pair_columns", c.pair_columns},
  };
}

inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  const nlohmann::json defaults = config_to_json(c);
  for (const auto& [key, value] : doc.items()) {
    if (!defaults.contains(key)) throw config_error("unknown config key: " + key);
    (void)value;
  }
  auto get = [&](const char* key, auto& field) {
    if (doc.contains(key)) doc.at(key).get_to(field);
  };
  get("family", c.family);
  get("x_size", c.x_size);
  get("y0_size", c.y0_size);
  get("noise_domains", c.noise_domains);
  get("domain_sizes", c.domain_sizes);
  get("reference_count", c.reference_count);
  get("sample_sizes", c.sample_sizes);
  get("models_per_setting", c.models_per_setting);
  get("epsilon", c.epsilon);
  get("methods", c.methods);
  get("master_seed", c.master_seed);
  get("alpha", c.alpha);
  get("dr_forced", c.dr_forced);
  get("permutations", c.permutations);
  get("workers", c.workers);
  get("epsilons", c.epsilons);
  get("threshold_sample_size", c.threshold_sample_size);
  get("decision_rate_sample_size", c.decision_rate_sample_size);
  get("rate_grid_percent", c.rate_grid_percent);
  get("timing_repetitions", c.timing_repetitions);
  get("timing_models", c.timing_models);
  get("pairs_dir", c.pairs_dir);
  get("meta_file", c.meta_file);
  get("replicates", c.replicates);
  get("resample", c.resample);
  get("excluded_pairs", c.excluded_pairs);
  get("scale100_pairs", c.scale100_pairs);
  get("pair_columns", c.pair_columns);
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return config_from_json(doc);
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shortest representation that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[40];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

// One table of string cells plus a JSON mirror; every run_* returns this.
struct ExperimentReport {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  nlohmann::json config_echo;
  nlohmann::json summary;  // optional report-specific aggregates
  std::string config_hash;
  std::uint64_t master_seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj;
      for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
      rows_json.push_back(obj);
    }
    nlohmann::json doc{
        {"tool", kToolName},           {"version", kToolVersion},
        {"report", name},              {"master_seed", master_seed},
        {"config_hash", config_hash},  {"config", config_echo},
        {"rows", rows_json},
    };
    if (!summary.is_null()) doc["summary"] = summary;
    return doc;
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += columns[c];
      out += c + 1 < columns.size() ? ',' : '\n';
    }
    for (const auto& row : rows)
      for (std::size_t c = 0; c < row.size(); ++c) {
        out += row[c];
        out += c + 1 < row.size() ? ',' : '\n';
      }
    return out;
  }
};

inline ExperimentReport make_report(const std::string& name, const ExperimentConfig& cfg,
                                    std::vector<std::string> columns) {
  ExperimentReport report;
  report.name = name;
  report.columns = std::move(columns);
  report.config_echo = config_to_json(cfg);
  report.config_hash = detail::hex64(detail::fnv1a64(report.config_echo.dump()));
  report.master_seed = cfg.master_seed;
  return report;
}

// A generatable setting of one synthetic family.
struct BenchSetting {
  std::string label;
  std::function<DiscreteModel(Rng&)> generate;
};

inline std::vector<BenchSetting> enumerate_settings(const ExperimentConfig& cfg) {
  std::vector<BenchSetting> settings;
  if (cfg.family == "anm") {
    for (const auto& bounds : cfg.noise_domains) {
      const auto domain = contiguous_range(bounds.first, bounds.second);
      const int x_size = cfg.x_size;
      const int y0_size = cfg.y0_size;
      settings.push_back({"N=" + std::to_string(domain.size()),
                          [domain, x_size, y0_size](Rng& rng) {
                            return gen_anm(rng, x_size, y0_size, domain);
                          }});
    }
  } else if (cfg.family == "reference_set") {
    for (const auto& sizes : cfg.domain_sizes) {
      const int xs = sizes.first;
      const int ys = sizes.second;
      const int pool = cfg.reference_count;
      settings.push_back({std::to_string(xs) + "x" + std::to_string(ys),
                          [xs, ys, pool](Rng& rng) {
                            return gen_reference_set_model(rng, xs, ys, pool);
                          }});
    }
  } else {
    throw config_error("family " + cfg.family + " has no synthetic settings");
  }
  return settings;
}

namespace detail {

struct TrialRecord {
  Verdict verdict = Verdict::undecided;
  double d_xy = 0.0, d_yx = 0.0, delta = 0.0;
  double p_xy = 0.0, p_yx = 0.0;
  double ms = 0.0;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Deterministic seed chain (master, setting, trial, stream).
inline Rng trial_rng(const ExperimentConfig& cfg, std::size_t setting_idx, std::size_t trial,
                     std::size_t stream) {
  return Rng(cfg.master_seed).derive(setting_idx).derive(trial).derive(stream);
}

inline TrialRecord run_dc_trial(const PairedSample& sample, double epsilon) {
  const auto start = std::chrono::steady_clock::now();
  const InferenceOutput out = infer(sample, epsilon);
  TrialRecord rec;
  rec.ms = elapsed_ms(start);
  rec.verdict = out.decision.verdict;
  rec.d_xy = out.decision.measures.d_xy;
  rec.d_yx = out.decision.measures.d_yx;
  rec.delta = out.decision.delta;
  return rec;
}

inline TrialRecord run_dr_trial(const PairedSample& sample, const ExperimentConfig& cfg,
                                std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const DrDecision decision = dr_decide(sample, cfg.alpha, cfg.dr_forced, seed, cfg.permutations);
  TrialRecord rec;
  rec.ms = elapsed_ms(start);
  rec.verdict = decision.verdict;
  rec.p_xy = decision.fit_xy.dependence_score;
  rec.p_yx = decision.fit_yx.dependence_score;
  return rec;
}

struct Tally {
  int correct = 0, wrong = 0, undecided = 0;

  void add(Verdict v, Verdict truth) {
    if (v == Verdict::undecided) {
      ++undecided;
    } else if (v == truth) {
      ++correct;
    } else {
      ++wrong;
    }
  }

  double accuracy() const {
    return static_cast<double>(correct) / std::max(1, correct + wrong);
  }
};

}  // namespace detail

// Accuracy study: generate models per setting, sample each at every sample
// size, run each method forced-choice, score against ground truth.
inline ExperimentReport run_accuracy(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report = make_report(
      "accuracy", cfg,
      {"family", "setting", "method", "sample_size", "models", "correct", "wrong", "undecided",
       "accuracy", "mean_d_xy", "mean_d_yx", "mean_delta", "mean_p_xy", "mean_p_yx",
       "mean_trial_ms"});
  const auto settings = enumerate_settings(cfg);
  const std::size_t models = static_cast<std::size_t>(cfg.models_per_setting);

  for (std::size_t s = 0; s < settings.size(); ++s) {
    for (std::size_t k = 0; k < cfg.sample_sizes.size(); ++k) {
      const std::size_t n = cfg.sample_sizes[k];
      for (const auto& method : cfg.methods) {
        std::vector<detail::TrialRecord> records(models);
        parallel_for(models, cfg.workers, [&](std::size_t t) {
          Rng model_rng = detail::trial_rng(cfg, s, t, 0);
          const DiscreteModel model = settings[s].generate(model_rng);
          Rng sample_rng = detail::trial_rng(cfg, s, t, 1 + k);
          const PairedSample sample = sample_model(model, n, sample_rng);
          if (method == "dc") {
            records[t] = detail::run_dc_trial(sample, cfg.epsilon);
          } else {
            records[t] = detail::run_dr_trial(sample, cfg, detail::trial_rng(cfg, s, t, 1000 + k).seed());
          }
        });
        detail::Tally tally;
        double sum_dxy = 0, sum_dyx = 0, sum_pxy = 0, sum_pyx = 0, sum_ms = 0;
        for (const auto& rec : records) {
          tally.add(rec.verdict, Verdict::x_causes_y);
          sum_dxy += rec.d_xy;
          sum_dyx += rec.d_yx;
          sum_pxy += rec.p_xy;
          sum_pyx += rec.p_yx;
          sum_ms += rec.ms;
        }
        const double inv = 1.0 / static_cast<double>(models);
        std::vector<std::string> row{
            cfg.family,
            settings[s].label,
            method,
            std::to_string(n),
            std::to_string(models),
            std::to_string(tally.correct),
            std::to_string(tally.wrong),
            std::to_string(tally.undecided),
            detail::fmt_double(tally.accuracy()),
            method == "dc" ? detail::fmt_double(sum_dxy * inv) : std::string(),
            method == "dc" ? detail::fmt_double(sum_dyx * inv) : std::string(),
            method == "dc" ? detail::fmt_double((sum_dyx - sum_dxy) * inv) : std::string(),
            method == "dr" ? detail::fmt_double(sum_pxy * inv) : std::string(),
            method == "dr" ? detail::fmt_double(sum_pyx * inv) : std::string(),
            detail::fmt_double(sum_ms * inv),
        };
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

// Timing study: total wall time of `timing_repetitions` runs over
// `timing_models` fixed samples per sample size, same data for every method,
// warm-up discarded, single worker.
inline ExperimentReport run_timing(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report =
      make_report("timing", cfg,
                  {"family", "setting", "method", "sample_size", "models", "repetitions",
                   "total_seconds", "mean_trial_ms"});
  const auto settings = enumerate_settings(cfg);
  const std::size_t models = static_cast<std::size_t>(std::max(1, cfg.timing_models));
  const int reps = std::max(1, cfg.timing_repetitions);

  for (std::size_t s = 0; s < settings.size(); ++s) {
    for (std::size_t k = 0; k < cfg.sample_sizes.size(); ++k) {
      const std::size_t n = cfg.sample_sizes[k];
      std::vector<PairedSample> samples;
      samples.reserve(models);
      for (std::size_t t = 0; t < models; ++t) {
        Rng model_rng = detail::trial_rng(cfg, s, t, 0);
        const DiscreteModel model = settings[s].generate(model_rng);
        Rng sample_rng = detail::trial_rng(cfg, s, t, 1 + k);
        samples.push_back(sample_model(model, n, sample_rng));
      }
      for (const auto& method : cfg.methods) {
        auto run_once = [&](const PairedSample& sample, std::size_t t) {
          if (method == "dc") {
            (void)infer(sample, cfg.epsilon);
          } else {
            (void)dr_decide(sample, cfg.alpha, cfg.dr_forced,
                            detail::trial_rng(cfg, s, t, 1000 + k).seed(), cfg.permutations);
          }
        };
        run_once(samples.front(), 0);  // warm-up, discarded
        const auto start = std::chrono::steady_clock::now();
        for (int rep = 0; rep < reps; ++rep)
          for (std::size_t t = 0; t < models; ++t) run_once(samples[t], t);
        const double total_s = detail::elapsed_ms(start) / 1000.0;
        report.rows.push_back({cfg.family, settings[s].label, method, std::to_string(n),
                               std::to_string(models), std::to_string(reps),
                               detail::fmt_double(total_s),
                               detail::fmt_double(total_s * 1000.0 /
                                                  (static_cast<double>(reps) * models))});
      }
    }
  }
  return report;
}

// Threshold study: one DC run per trial at a fixed sample size, then every
// epsilon is applied to the same set of deltas.
inline ExperimentReport run_threshold_study(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report = make_report(
      "threshold", cfg,
      {"family", "setting", "method", "sample_size", "epsilon", "models", "correct", "wrong",
       "undecided", "prop_correct", "prop_wrong", "prop_undecided", "accuracy"});
  const auto settings = enumerate_settings(cfg);
  const std::size_t models = static_cast<std::size_t>(cfg.models_per_setting);
  const std::size_t n = cfg.threshold_sample_size;

  for (std::size_t s = 0; s < settings.size(); ++s) {
    std::vector<double> deltas(models);
    parallel_for(models, cfg.workers, [&](std::size_t t) {
      Rng model_rng = detail::trial_rng(cfg, s, t, 0);
      const DiscreteModel model = settings[s].generate(model_rng);
      Rng sample_rng = detail::trial_rng(cfg, s, t, 1);
      const PairedSample sample = sample_model(model, n, sample_rng);
      deltas[t] = detail::run_dc_trial(sample, 0.0).delta;
    });
    for (double eps : cfg.epsilons) {
      detail::Tally tally;
      for (double delta : deltas) {
        const DecisionResult d = decide(DependencePair{0.0, delta}, eps);
        tally.add(d.verdict, Verdict::x_causes_y);
      }
      const double inv = 1.0 / static_cast<double>(models);
      report.rows.push_back(
          {cfg.family, settings[s].label, "dc", std::to_string(n), detail::fmt_double(eps),
           std::to_string(models), std::to_string(tally.correct), std::to_string(tally.wrong),
           std::to_string(tally.undecided), detail::fmt_double(tally.correct * inv),
           detail::fmt_double(tally.wrong * inv), detail::fmt_double(tally.undecided * inv),
           detail::fmt_double(tally.accuracy())});
    }
  }
  return report;
}

// Decision-rate curve: rank trials by |delta| descending and score the top
// fraction at each requested rate; one DC run per trial, no re-running.
inline ExperimentReport run_decision_rate_curve(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report =
      make_report("decision_rate", cfg,
                  {"family", "setting", "sample_size", "models", "rate_percent", "scored",
                   "correct", "wrong", "undecided", "correct_percentage"});
  const auto settings = enumerate_settings(cfg);
  const std::size_t models = static_cast<std::size_t>(cfg.models_per_setting);
  const std::size_t n = cfg.decision_rate_sample_size;

  for (std::size_t s = 0; s < settings.size(); ++s) {
    std::vector<detail::TrialRecord> records(models);
    parallel_for(models, cfg.workers, [&](std::size_t t) {
      Rng model_rng = detail::trial_rng(cfg, s, t, 0);
      const DiscreteModel model = settings[s].generate(model_rng);
      Rng sample_rng = detail::trial_rng(cfg, s, t, 1);
      const PairedSample sample = sample_model(model, n, sample_rng);
      records[t] = detail::run_dc_trial(sample, 0.0);
    });
    std::vector<std::size_t> order(models);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(records[a].delta) > std::abs(records[b].delta);
    });
    for (int rate : cfg.rate_grid_percent) {
      const std::size_t scored = std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::llround(static_cast<double>(rate) * static_cast<double>(models) / 100.0)));
      detail::Tally tally;
      for (std::size_t r = 0; r < scored && r < models; ++r)
        tally.add(records[order[r]].verdict, Verdict::x_causes_y);
      report.rows.push_back(
          {cfg.family, settings[s].label, std::to_string(n), std::to_string(models),
           std::to_string(rate), std::to_string(scored), std::to_string(tally.correct),
           std::to_string(tally.wrong), std::to_string(tally.undecided),
           detail::fmt_double(100.0 * tally.accuracy())});
    }
  }
  return report;
}

inline void write_report_files(const ExperimentReport& report, const std::string& out_dir) {
  const std::string base = out_dir + "/" + report.name;
  {
    std::ofstream csv(base + ".csv", std::ios::binary);
    if (!csv) throw data_error("cannot write " + base + ".csv");
    csv << report.to_csv();
  }
  {
    std::ofstream json(base + ".json", std::ios::binary);
    if (!json) throw data_error("cannot write " + base + ".json");
    json << report.to_json().dump(2) << '\n';
  }
}

}  // namespace dci
