#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dci/benchmark.hpp"
#include "dci/errors.hpp"
#include "dci/ingest.hpp"

namespace dci {

namespace detail {

inline std::string pair_file_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "pair%04d.txt", id);
  return buf;
}

}  // namespace detail

// Metadata file: one "<pair id> <direction>" entry per line, direction given
// as x_to_y / y_to_x (x->y / y->x also accepted). '#' starts a comment.
inline std::map<int, Verdict> load_pair_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open metadata file " + path);
  std::map<int, Verdict> truth;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::strip_cr(raw);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    std::istringstream fields{std::string(trimmed)};
    int id = 0;
    std::string direction;
    if (!(fields >> id >> direction))
      throw data_error("metadata line " + std::to_string(line_no) + ": expected '<id> <direction>'");
    if (direction == "x_to_y" || direction == "x->y") {
      truth[id] = Verdict::x_causes_y;
    } else if (direction == "y_to_x" || direction == "y->x") {
      truth[id] = Verdict::y_causes_x;
    } else {
      throw data_error("metadata line " + std::to_string(line_no) + ": unknown direction '" +
                       direction + "'");
    }
  }
  if (truth.empty()) throw data_error("metadata file lists no pairs");
  return truth;
}

// Real-pair study: discretize both columns of every retained pair, draw
// seeded resamples, run DC on each replicate, score against the recorded
// ground truth. Per-pair failures are recorded and the run continues.
inline ExperimentReport run_real_pairs(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.pairs_dir.empty()) throw config_error("pairs_dir is required for real_pairs");
  if (cfg.meta_file.empty()) throw config_error("meta_file is required for real_pairs");

  ExperimentReport report = make_report(
      "real_pairs", cfg,
      {"pair_id", "file", "status", "n", "truth", "replicates", "correct", "wrong", "undecided",
       "errors", "accuracy"});

  const auto truth_by_id = load_pair_metadata(cfg.meta_file);
  const bool bootstrap = cfg.resample == "bootstrap";

  int pairs_scored = 0;
  double accuracy_sum = 0.0;
  long long pooled_correct = 0, pooled_wrong = 0;

  for (const auto& [id, truth] : truth_by_id) {
    const std::string file = detail::pair_file_name(id);
    auto emit = [&](const std::string& status, std::size_t n, const detail::Tally& tally,
                    int errors) {
      const bool scored = status == "ok" && tally.correct + tally.wrong > 0;
      report.rows.push_back(
          {std::to_string(id), file, status, std::to_string(n),
           truth == Verdict::x_causes_y ? "x_to_y" : "y_to_x", std::to_string(cfg.replicates),
           std::to_string(tally.correct), std::to_string(tally.wrong),
           std::to_string(tally.undecided), std::to_string(errors),
           scored ? detail::fmt_double(tally.accuracy()) : std::string()});
      if (scored) {
        ++pairs_scored;
        accuracy_sum += tally.accuracy();
        pooled_correct += tally.correct;
        pooled_wrong += tally.wrong;
      }
    };

    if (std::find(cfg.excluded_pairs.begin(), cfg.excluded_pairs.end(), id) !=
        cfg.excluded_pairs.end()) {
      emit("excluded", 0, {}, 0);
      continue;
    }
    std::ifstream in(cfg.pairs_dir + "/" + file);
    if (!in) {
      emit("missing_file", 0, {}, 0);
      continue;
    }
    try {
      const auto [col_a, col_b] =
          read_pair_columns(in, static_cast<std::size_t>(cfg.pair_columns.first),
                            static_cast<std::size_t>(cfg.pair_columns.second));
      const bool scale100 = std::find(cfg.scale100_pairs.begin(), cfg.scale100_pairs.end(), id) !=
                            cfg.scale100_pairs.end();
      const DiscretizeRule rule =
          scale100 ? DiscretizeRule::scaled(100.0) : DiscretizeRule::automatic();
      PairedSample sample;
      sample.x = discretize_column(col_a, rule);
      sample.y = discretize_column(col_b, rule);

      if (detail::sorted_distinct(sample.x).size() < 2 ||
          detail::sorted_distinct(sample.y).size() < 2) {
        emit("degenerate", sample.n(), {}, 0);
        continue;
      }

      const std::size_t n = sample.n();
      detail::Tally tally;
      int errors = 0;
      for (int r = 0; r < cfg.replicates; ++r) {
        Rng rng = Rng(cfg.master_seed).derive(static_cast<std::uint64_t>(id)).derive(r);
        PairedSample replicate;
        if (bootstrap) {
          replicate.x.reserve(n);
          replicate.y.reserve(n);
          for (std::size_t t = 0; t < n; ++t) {
            const std::size_t pick = rng.below(n);
            replicate.push(sample.x[pick], sample.y[pick]);
          }
        } else {
          std::vector<std::size_t> index(n);
          std::iota(index.begin(), index.end(), 0);
          rng.shuffle(index);
          const std::size_t keep = std::max<std::size_t>(2, n / 2);
          for (std::size_t t = 0; t < keep; ++t)
            replicate.push(sample.x[index[t]], sample.y[index[t]]);
        }
        try {
          const InferenceOutput out = infer(replicate, cfg.epsilon);
          tally.add(out.decision.verdict, truth);
        } catch (const data_error&) {
          ++errors;  // e.g. a resample that collapsed one support
        }
      }
      emit("ok", n, tally, errors);
    } catch (const data_error& e) {
      report.rows.push_back({std::to_string(id), file, std::string("error: ") + e.what(), "0",
                             truth == Verdict::x_causes_y ? "x_to_y" : "y_to_x",
                             std::to_string(cfg.replicates), "0", "0", "0", "0", ""});
    }
  }

  const double pair_averaged = pairs_scored > 0 ? accuracy_sum / pairs_scored : 0.0;
  const double pooled = pooled_correct + pooled_wrong > 0
                            ? static_cast<double>(pooled_correct) /
                                  static_cast<double>(pooled_correct + pooled_wrong)
                            : 0.0;
  report.rows.push_back(
      {"overall_pair_averaged", "", "summary", "", "", "", "", "", "", "",
       detail::fmt_double(pair_averaged)});
  report.rows.push_back({"overall_pooled", "", "summary", "", "", "",
                         std::to_string(pooled_correct), std::to_string(pooled_wrong), "", "",
                         detail::fmt_double(pooled)});
  report.summary = nlohmann::json{{"pairs_scored", pairs_scored},
                                  {"accuracy_pair_averaged", pair_averaged},
                                  {"accuracy_pooled", pooled}};
  return report;
}

}  // namespace dci
