#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dci/benchmark.hpp"
#include "dci/discrete_regression.hpp"
#include "dci/inference.hpp"
#include "dci/ingest.hpp"
#include "dci/real_pairs.hpp"
#include "dci/synthetic.hpp"
#include "dci/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dci::data_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "lo..hi" -> contiguous integer set
std::vector<int> parse_noise_domain(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos)
    throw dci::config_error("noise domain must look like 'lo..hi', got '" + text + "'");
  int lo = 0, hi = 0;
  if (!dci::detail::parse_int(text.substr(0, dots), lo) ||
      !dci::detail::parse_int(text.substr(dots + 2), hi) || lo > hi)
    throw dci::config_error("invalid noise domain '" + text + "'");
  return dci::contiguous_range(lo, hi);
}

struct InferOptions {
  std::string input;
  std::string method = "dc";
  double epsilon = 0.05;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int permutations = 1000;
  bool forced = false;
};

int cmd_infer(const InferOptions& opt) {
  std::istringstream in(read_input(opt.input));
  const dci::PairedSample sample = dci::parse_sample_csv(in);
  nlohmann::json out;
  if (opt.method == "dc") {
    out = dci::to_json(dci::infer(sample, opt.epsilon));
  } else {
    const dci::JointPmf joint = dci::estimate_joint(sample);
    const dci::DrDecision decision =
        dci::dr_decide(sample, opt.alpha, opt.forced, opt.seed, opt.permutations);
    out = dci::to_json(decision, sample.n(), joint.rows(), joint.cols());
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_dcor(const std::string& input) {
  std::istringstream in(read_input(input));
  const auto table = dci::parse_numeric_csv(in);
  if (table.front().size() < 2)
    throw dci::data_error("observation table needs at least two columns (alpha, beta...)");
  dci::ObservationSet obs;
  obs.alpha.reserve(table.size());
  obs.beta.reserve(table.size());
  for (const auto& row : table) {
    obs.alpha.push_back(row.front());
    obs.beta.emplace_back(row.begin() + 1, row.end());
  }
  std::printf("%.17g\n", dci::dcor(obs));
  return 0;
}

struct SynthOptions {
  std::string family = "anm";
  int x_size = 30;
  int y_size = 30;
  std::string noise_domain = "0..1";
  int reference_count = 0;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

int cmd_synth(const SynthOptions& opt) {
  dci::Rng rng(opt.seed);
  dci::DiscreteModel model;
  if (opt.family == "anm") {
    const auto domain = parse_noise_domain(opt.noise_domain);
    model = dci::gen_anm(rng, opt.x_size, opt.y_size, domain);
  } else if (opt.family == "reference_set") {
    model = dci::gen_reference_set_model(rng, opt.x_size, opt.y_size, opt.reference_count);
  } else {
    throw dci::config_error("unknown family: " + opt.family);
  }
  const dci::PairedSample sample = dci::sample_model(model, opt.n, rng);

  std::filesystem::create_directories(opt.out_dir);
  const std::string model_path = opt.out_dir + "/model.json";
  const std::string sample_path = opt.out_dir + "/sample.csv";
  {
    std::ofstream out(model_path, std::ios::binary);
    if (!out) throw dci::data_error("cannot write " + model_path);
    out << dci::model_to_json(model).dump(2) << '\n';
  }
  {
    std::ofstream out(sample_path, std::ios::binary);
    if (!out) throw dci::data_error("cannot write " + sample_path);
    dci::write_sample_csv(out, sample);
  }
  std::cout << model_path << '\n' << sample_path << '\n';
  return 0;
}

struct DiscretizeOptions {
  std::string input;
  std::string rule = "auto";
  std::pair<int, int> cols{0, 1};
};

dci::DiscretizeRule parse_rule(const std::string& text) {
  if (text == "auto") return dci::DiscretizeRule::automatic();
  if (text.rfind("scale:", 0) == 0) {
    double k = 0.0;
    if (!dci::detail::parse_double(text.substr(6), k) || !(k > 0.0))
      throw dci::config_error("invalid scale in rule '" + text + "'");
    return dci::DiscretizeRule::scaled(k);
  }
  throw dci::config_error("rule must be 'auto' or 'scale:<k>', got '" + text + "'");
}

int cmd_discretize(const DiscretizeOptions& opt) {
  std::string text = read_input(opt.input);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  const auto [col_a, col_b] = dci::read_pair_columns(in, static_cast<std::size_t>(opt.cols.first),
                                                     static_cast<std::size_t>(opt.cols.second));
  const dci::DiscretizeRule rule = parse_rule(opt.rule);
  dci::PairedSample sample;
  sample.x = dci::discretize_column(col_a, rule);
  sample.y = dci::discretize_column(col_b, rule);
  dci::write_sample_csv(std::cout, sample);
  return 0;
}

struct BenchOptions {
  std::string config_path;
  std::string out_dir = ".";
  int models = 0;       // 0 = keep config value
  bool full_scale = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned workers = 0;
  bool workers_set = false;
  std::string pairs_dir;
  std::string meta_file;
  std::string cols;
};

std::pair<int, int> parse_cols(const std::string& text) {
  const auto comma = text.find(',');
  int a = 0, b = 0;
  if (comma == std::string::npos || !dci::detail::parse_int(text.substr(0, comma), a) ||
      !dci::detail::parse_int(text.substr(comma + 1), b) || a < 0 || b < 0)
    throw dci::config_error("--cols expects 'i,j' with nonnegative indices");
  return {a, b};
}

dci::ExperimentConfig bench_config(const BenchOptions& opt, const char* kind) {
  dci::ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = dci::load_config(opt.config_path);
  } else {
    // Protocol defaults per study when no config file is given.
    const std::string k(kind);
    if (k == "threshold" || k == "timing") {
      cfg.family = "reference_set";
      cfg.domain_sizes = {{15, 15}, {20, 20}};
    } else if (k == "decision_rate") {
      cfg.family = "reference_set";
      cfg.domain_sizes = {{15, 15}};
    } else if (k == "real_pairs") {
      cfg.family = "real_pairs";
    }
  }
  if (opt.full_scale) cfg.models_per_setting = 500;
  if (opt.models > 0) cfg.models_per_setting = opt.models;
  if (opt.seed_set) cfg.master_seed = opt.seed;
  if (opt.workers_set) cfg.workers = opt.workers;
  if (!opt.pairs_dir.empty()) cfg.pairs_dir = opt.pairs_dir;
  if (!opt.meta_file.empty()) cfg.meta_file = opt.meta_file;
  if (!opt.cols.empty()) cfg.pair_columns = parse_cols(opt.cols);
  dci::validate(cfg);
  return cfg;
}

int cmd_bench(const BenchOptions& opt, const std::string& kind) {
  dci::ExperimentReport report;
  if (kind == "accuracy") {
    report = dci::run_accuracy(bench_config(opt, "accuracy"));
  } else if (kind == "timing") {
    report = dci::run_timing(bench_config(opt, "timing"));
  } else if (kind == "threshold") {
    report = dci::run_threshold_study(bench_config(opt, "threshold"));
  } else if (kind == "decision-rate") {
    report = dci::run_decision_rate_curve(bench_config(opt, "decision_rate"));
  } else {
    report = dci::run_real_pairs(bench_config(opt, "real_pairs"));
  }
  std::filesystem::create_directories(opt.out_dir);
  dci::write_report_files(report, opt.out_dir);
  std::cout << opt.out_dir << "/" << report.name << ".csv\n"
            << opt.out_dir << "/" << report.name << ".json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(dci::kToolName) +
               " - causal direction inference for discrete variable pairs"};
  app.set_version_flag("--version", std::string(dci::kToolName) + " " + dci::kToolVersion);
  app.require_subcommand(1);

  InferOptions infer_opt;
  auto* infer_cmd = app.add_subcommand("infer", "Infer causal direction from a two-column CSV");
  infer_cmd->add_option("input", infer_opt.input, "CSV file ('-' or empty reads stdin)");
  infer_cmd->add_option("--epsilon", infer_opt.epsilon, "decision threshold (default 0.05)");
  infer_cmd->add_option("--method", infer_opt.method, "dc or dr")
      ->check(CLI::IsMember({"dc", "dr"}));
  infer_cmd->add_option("--seed", infer_opt.seed, "seed for the dr permutation test");
  infer_cmd->add_option("--alpha", infer_opt.alpha, "dr acceptance level");
  infer_cmd->add_option("--permutations", infer_opt.permutations, "dr permutation count");
  infer_cmd->add_flag("--forced", infer_opt.forced, "force dr to pick a direction");

  std::string dcor_input;
  auto* dcor_cmd = app.add_subcommand("dcor", "Distance correlation of an observation table");
  dcor_cmd->add_option("input", dcor_input, "CSV: first column alpha, remaining columns beta");

  SynthOptions synth_opt;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic model and sample");
  synth_cmd->add_option("--family", synth_opt.family, "anm or reference_set")
      ->check(CLI::IsMember({"anm", "reference_set"}));
  synth_cmd->add_option("--x-size", synth_opt.x_size, "|X|");
  synth_cmd->add_option("--y-size", synth_opt.y_size, "|Y0| (anm) or |Y| (reference_set)");
  synth_cmd->add_option("--noise-domain", synth_opt.noise_domain, "contiguous set, e.g. -1..1");
  synth_cmd->add_option("--reference-count", synth_opt.reference_count,
                        "reference distributions (0 = |Y|/4)");
  synth_cmd->add_option("--n", synth_opt.n, "sample size");
  synth_cmd->add_option("--seed", synth_opt.seed, "master seed");
  synth_cmd->add_option("--out", synth_opt.out_dir, "output directory");

  DiscretizeOptions disc_opt;
  std::string rule_text = "auto";
  std::string cols_text;
  auto* disc_cmd = app.add_subcommand("discretize", "Round numeric columns to integer codes");
  disc_cmd->add_option("input", disc_opt.input, "numeric file ('-' or empty reads stdin)");
  disc_cmd->add_option("--rule", rule_text, "auto or scale:<k>");
  disc_cmd->add_option("--cols", cols_text, "zero-based column pair, e.g. 0,1");

  BenchOptions bench_opt;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark study");
  bench_cmd->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> bench_kinds;
  for (const char* kind : {"accuracy", "timing", "threshold", "decision-rate", "real-pairs"}) {
    auto* sub = bench_cmd->add_subcommand(kind);
    sub->add_option("--config", bench_opt.config_path, "JSON config file");
    sub->add_option("--out", bench_opt.out_dir, "output directory");
    sub->add_option("--models", bench_opt.models, "models per setting");
    sub->add_flag("--full-scale", bench_opt.full_scale, "use the full 500 models per setting");
    sub->add_option("--seed", bench_opt.seed, "master seed")
        ->each([&](const std::string&) { bench_opt.seed_set = true; });
    sub->add_option("--workers", bench_opt.workers, "worker threads (0 = auto)")
        ->each([&](const std::string&) { bench_opt.workers_set = true; });
    sub->add_option("--pairs-dir", bench_opt.pairs_dir, "cause-effect pair files directory");
    sub->add_option("--meta", bench_opt.meta_file, "pair id -> ground truth metadata file");
    sub->add_option("--cols", bench_opt.cols, "zero-based pair file columns, e.g. 0,1");
    bench_kinds.emplace_back(kind, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;  // --help/--version exit 0
  }

  try {
    if (*infer_cmd) return cmd_infer(infer_opt);
    if (*dcor_cmd) return cmd_dcor(dcor_input);
    if (*synth_cmd) return cmd_synth(synth_opt);
    if (*disc_cmd) {
      if (!cols_text.empty()) disc_opt.cols = parse_cols(cols_text);
      disc_opt.rule = rule_text;
      return cmd_discretize(disc_opt);
    }
    for (const auto& [kind, sub] : bench_kinds)
      if (sub->parsed()) return cmd_bench(bench_opt, kind);
    throw dci::config_error("no subcommand given");
  } catch (const dci::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const dci::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const dci::internal_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
