#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dci/benchmark.hpp"

using namespace dci;

namespace {

std::size_t column_index(const ExperimentReport& report, const std::string& name) {
  for (std::size_t c = 0; c < report.columns.size(); ++c)
    if (report.columns[c] == name) return c;
  FAIL("missing column " + name);
  return 0;
}

const std::vector<std::string>& find_row(const ExperimentReport& report,
                                         const std::string& method, const std::string& n) {
  const auto mc = column_index(report, "method");
  const auto nc = column_index(report, "sample_size");
  for (const auto& row : report.rows)
    if (row[mc] == method && row[nc] == n) return row;
  FAIL("missing row");
  static std::vector<std::string> none;
  return none;
}

std::string csv_without_timing(const ExperimentReport& report) {
  std::string csv;
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    if (report.columns[c].find("ms") != std::string::npos ||
        report.columns[c].find("seconds") != std::string::npos)
      continue;
    csv += report.columns[c];
    csv += '|';
  }
  for (const auto& row : report.rows)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (report.columns[c].find("ms") != std::string::npos ||
          report.columns[c].find("seconds") != std::string::npos)
        continue;
      csv += row[c];
      csv += '|';
    }
  return csv;
}

ExperimentConfig tiny_accuracy_config() {
  ExperimentConfig cfg;
  cfg.family = "anm";
  cfg.noise_domains = {{0, 1}};
  cfg.sample_sizes = {300, 800};
  cfg.models_per_setting = 8;
  cfg.methods = {"dc", "dr"};
  cfg.permutations = 100;
  cfg.master_seed = 5150;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("config JSON round-trips and rejects unknown keys") {
  ExperimentConfig cfg;
  cfg.family = "reference_set";
  cfg.domain_sizes = {{15, 15}};
  cfg.models_per_setting = 42;
  cfg.master_seed = 99;
  const auto doc = config_to_json(cfg);
  const auto back = config_from_json(doc);
  REQUIRE(back.family == "reference_set");
  REQUIRE(back.models_per_setting == 42);
  REQUIRE(back.master_seed == 99);
  REQUIRE(back.domain_sizes == cfg.domain_sizes);

  REQUIRE_THROWS_AS(config_from_json(nlohmann::json{{"modles", 3}}), config_error);
  REQUIRE_THROWS_AS(config_from_json(nlohmann::json{{"family", "weird"}}), config_error);
  REQUIRE_THROWS_AS(config_from_json(nlohmann::json{{"sample_sizes", nlohmann::json::array()}}),
                    config_error);
  REQUIRE_THROWS_AS(config_from_json(nlohmann::json{{"epsilon", -0.5}}), config_error);
  REQUIRE_THROWS_AS(config_from_json(nlohmann::json{{"methods", {"dc", "xx"}}}), config_error);
}

TEST_CASE("accuracy bookkeeping identity holds on every row") {
  const auto report = run_accuracy(tiny_accuracy_config());
  REQUIRE(report.rows.size() == 4);  // 1 setting x 2 sizes x 2 methods
  const auto models_c = column_index(report, "models");
  const auto correct_c = column_index(report, "correct");
  const auto wrong_c = column_index(report, "wrong");
  const auto undecided_c = column_index(report, "undecided");
  const auto accuracy_c = column_index(report, "accuracy");
  for (const auto& row : report.rows) {
    const int models = std::stoi(row[models_c]);
    const int correct = std::stoi(row[correct_c]);
    const int wrong = std::stoi(row[wrong_c]);
    const int undecided = std::stoi(row[undecided_c]);
    REQUIRE(correct + wrong + undecided == models);
    REQUIRE(std::stod(row[accuracy_c]) ==
            Catch::Approx(double(correct) / std::max(1, correct + wrong)));
  }
}

TEST_CASE("single deterministic model gives a zero-or-one accuracy") {
  ExperimentConfig cfg;
  cfg.family = "anm";
  cfg.noise_domains = {{0, 0}};  // point-mass noise
  cfg.sample_sizes = {2000};
  cfg.models_per_setting = 1;
  cfg.methods = {"dc"};
  cfg.master_seed = 31;
  const auto report = run_accuracy(cfg);
  REQUIRE(report.rows.size() == 1);
  const auto& row = report.rows.front();
  const double acc = std::stod(row[column_index(report, "accuracy")]);
  REQUIRE((acc == 0.0 || acc == 1.0));
  const int sum = std::stoi(row[column_index(report, "correct")]) +
                  std::stoi(row[column_index(report, "wrong")]) +
                  std::stoi(row[column_index(report, "undecided")]);
  REQUIRE(sum == 1);
}

TEST_CASE("identical config and seed reproduce the report byte for byte") {
  const auto a = run_accuracy(tiny_accuracy_config());
  const auto b = run_accuracy(tiny_accuracy_config());
  REQUIRE(csv_without_timing(a) == csv_without_timing(b));
  REQUIRE(a.config_hash == b.config_hash);

  // a different seed must change the hashed provenance
  auto cfg = tiny_accuracy_config();
  cfg.master_seed += 1;
  const auto c = run_accuracy(cfg);
  REQUIRE(c.config_hash != a.config_hash);
}

TEST_CASE("worker count does not change results") {
  auto cfg = tiny_accuracy_config();
  cfg.methods = {"dc"};
  cfg.workers = 1;
  const auto serial = run_accuracy(cfg);
  cfg.workers = 4;
  const auto parallel = run_accuracy(cfg);
  REQUIRE(csv_without_timing(serial) == csv_without_timing(parallel));
}

TEST_CASE("threshold study reuses one trial set across epsilons") {
  ExperimentConfig cfg;
  cfg.family = "reference_set";
  cfg.domain_sizes = {{12, 12}};
  cfg.models_per_setting = 40;
  cfg.threshold_sample_size = 1500;
  cfg.epsilons = {0.01, 0.05, 0.1};
  cfg.master_seed = 33;
  const auto report = run_threshold_study(cfg);
  REQUIRE(report.rows.size() == 3);
  const auto undecided_c = column_index(report, "undecided");
  const auto accuracy_c = column_index(report, "accuracy");
  int previous_undecided = -1;
  for (const auto& row : report.rows) {
    const int undecided = std::stoi(row[undecided_c]);
    REQUIRE(undecided >= previous_undecided);
    previous_undecided = undecided;
    const double acc = std::stod(row[accuracy_c]);
    REQUIRE(acc >= 0.0);
    REQUIRE(acc <= 1.0);
  }
}

TEST_CASE("decision-rate curve is defined at every requested rate") {
  ExperimentConfig cfg;
  cfg.family = "reference_set";
  cfg.domain_sizes = {{12, 12}};
  cfg.models_per_setting = 30;
  cfg.decision_rate_sample_size = 1200;
  cfg.rate_grid_percent = {10, 25, 50, 75, 100};
  cfg.master_seed = 35;
  const auto report = run_decision_rate_curve(cfg);
  REQUIRE(report.rows.size() == 5);
  const auto scored_c = column_index(report, "scored");
  const auto pct_c = column_index(report, "correct_percentage");
  for (const auto& row : report.rows) {
    REQUIRE(std::stoi(row[scored_c]) >= 1);
    const double pct = std::stod(row[pct_c]);
    REQUIRE(pct >= 0.0);
    REQUIRE(pct <= 100.0);
  }
  REQUIRE(std::stoi(report.rows.back()[scored_c]) == 30);
}

TEST_CASE("timing reports cover every method and sample size") {
  ExperimentConfig cfg;
  cfg.family = "reference_set";
  cfg.domain_sizes = {{12, 12}};
  cfg.sample_sizes = {300, 600};
  cfg.methods = {"dc", "dr"};
  cfg.timing_models = 2;
  cfg.timing_repetitions = 3;
  cfg.permutations = 50;
  cfg.master_seed = 37;
  const auto report = run_timing(cfg);
  REQUIRE(report.rows.size() == 4);
  for (const auto& n : {"300", "600"})
    for (const auto& method : {"dc", "dr"}) {
      const auto& row = find_row(report, method, n);
      REQUIRE(std::stod(row[column_index(report, "total_seconds")]) > 0.0);
    }
}

TEST_CASE("reports are written as CSV plus JSON with provenance") {
  const auto dir = std::filesystem::temp_directory_path() / "dci_report_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto cfg = tiny_accuracy_config();
  cfg.methods = {"dc"};
  const auto report = run_accuracy(cfg);
  write_report_files(report, dir.string());

  std::ifstream csv(dir / "accuracy.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  REQUIRE(header.rfind("family,setting,method,", 0) == 0);

  std::ifstream json_in(dir / "accuracy.json");
  REQUIRE(json_in.good());
  nlohmann::json doc;
  json_in >> doc;
  REQUIRE(doc.at("tool") == "dci");
  REQUIRE(doc.at("report") == "accuracy");
  REQUIRE(doc.at("master_seed").get<std::uint64_t>() == cfg.master_seed);
  REQUIRE(doc.at("config").at("family") == "anm");
  REQUIRE(doc.at("config_hash").get<std::string>().size() == 16);
  REQUIRE(doc.at("rows").size() == report.rows.size());
  std::filesystem::remove_all(dir);
}
