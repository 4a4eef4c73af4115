// smoothop: experiment runner for the smooth numerical reward toolkit.
//
//   smoothop train            [--config PATH] [--seed N] [--out DIR]
//   smoothop roadmap          [--config PATH] [--seed N] [--out DIR]
//   smoothop ablate           [--config PATH] [--seed N] [--out DIR] --axis NAME --values CSV
//   smoothop verify-theory    [--config PATH] [--seed N] [--out DIR]
//   smoothop verify-verifiers [--config PATH] [--seed N] [--out DIR]
//
// Exit status: 0 when every enabled assertion passes, 1 on assertion failure,
// 2 on configuration or usage errors.

#include <climits>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smoothop/smoothop.hpp"

namespace fs = std::filesystem;
using namespace smoothop;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string axis;
  std::string values;
};

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

ExperimentConfig resolve(const CommonArgs& args, Mode mode) {
  ExperimentConfig c = args.config_path.empty() ? ExperimentConfig{} : load_config(args.config_path);
  apply_env_overrides(c);
  if (args.seed) c.trainer.seed = *args.seed;
  if (!args.out_dir.empty()) c.out_dir = args.out_dir;
  c.mode = mode;
  if (!args.axis.empty()) c.ablate_axis = ablation_axis_from_string(args.axis);
  if (!args.values.empty()) c.ablate_values = split_csv(args.values);
  c.validate();
  return c;
}

class Outputs {
 public:
  explicit Outputs(const ExperimentConfig& c)
      : dir_(c.out_dir),
        prefix_(std::string(to_string(c.mode)) + "_seed" + std::to_string(c.trainer.seed) + "_") {
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / (prefix_ + name); }

  std::ofstream open(const std::string& name) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path(name).string());
    return out;
  }

  fs::path write_json(const std::string& name, const nlohmann::json& j) const {
    open(name) << j.dump(2) << '\n';
    return path(name);
  }

 private:
  fs::path dir_;
  std::string prefix_;
};

nlohmann::json summary_json(const ExperimentSummary& s) {
  return {{"initial_accuracy", s.initial_accuracy},
          {"final_accuracy", s.final_accuracy},
          {"best_accuracy", s.best_accuracy},
          {"T_conv", s.convergence_step ? nlohmann::json(*s.convergence_step) : nlohmann::json(nullptr)},
          {"mean_adv_variance", s.mean_adv_variance},
          {"mean_abs_advantage", s.mean_abs_advantage}};
}

nlohmann::json rows_json(const std::vector<RunRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"label", r.label},
                   {"T_conv", r.convergence_step ? nlohmann::json(*r.convergence_step) : nlohmann::json(nullptr)},
                   {"adv_variance", r.adv_variance},
                   {"mean_abs_advantage", r.mean_abs_advantage},
                   {"final_accuracy", r.final_accuracy}});
  return out;
}

int finish(const Outputs& out, nlohmann::json report) {
  const bool pass = report.value("pass", true);
  const auto path = out.write_json("report.json", report);
  if (!pass) {
    std::cerr << "assertions failed; see " << path.string() << '\n';
    return 1;
  }
  std::cout << "ok: " << path.string() << '\n';
  return 0;
}

int run_train(const ExperimentConfig& c, const Outputs& out) {
  auto csv = out.open("records.csv");
  auto jsonl = out.open("records.jsonl");
  csv << kRecordCsvHeader << '\n';
  const auto summary = run_experiment(c.trainer, resolve_corpus(c), [&](const TrainRecord& r) {
    write_record_csv_row(csv, r);
    jsonl << to_json(r).dump() << '\n';
  });
  auto report = summary_json(summary);
  report["pass"] = true;
  return finish(out, report);
}

int run_roadmap_mode(const ExperimentConfig& c, const Outputs& out) {
  const auto rows = run_roadmap(c.trainer, resolve_corpus(c));
  {
    auto csv = out.open("roadmap.csv");
    write_roadmap_csv(csv, rows);
  }
  auto row = [&](const std::string& label) -> const RunRow& {
    for (const auto& r : rows)
      if (r.label == label) return r;
    throw std::logic_error("missing roadmap row " + label);
  };
  const auto& sig = row("apgrpo_snra_sigmoid");
  const auto& fix = row("apgrpo_snra_fixed");
  const auto& bin = row("grpo_binary");
  auto conv = [](const RunRow& r) { return r.convergence_step.value_or(INT_MAX); };
  const bool conv_ok = conv(sig) <= conv(fix) && conv(fix) <= conv(bin);
  const bool acc_ok = sig.final_accuracy >= fix.final_accuracy && fix.final_accuracy >= bin.final_accuracy;
  const bool var_ok = sig.adv_variance <= bin.adv_variance;
  nlohmann::json report{
      {"note", "no supervised pre-training row: the matrix starts at binary-reward GRPO"},
      {"rows", rows_json(rows)},
      {"assertions",
       {{{"check", "T_conv: apgrpo_snra_sigmoid <= apgrpo_snra_fixed <= grpo_binary"}, {"pass", conv_ok}},
        {{"check", "final_accuracy: apgrpo_snra_sigmoid >= apgrpo_snra_fixed >= grpo_binary"}, {"pass", acc_ok}},
        {{"check", "adv_variance: apgrpo_snra_sigmoid <= grpo_binary"}, {"pass", var_ok}}}},
      {"pass", conv_ok && acc_ok && var_ok}};
  return finish(out, report);
}

int run_ablate_mode(const ExperimentConfig& c, const Outputs& out) {
  const auto rows = run_ablation(c.trainer, resolve_corpus(c), c.ablate_axis, c.ablate_values);
  {
    auto csv = out.open("ablation_" + std::string(to_string(c.ablate_axis)) + ".csv");
    write_ablation_csv(csv, c.ablate_axis, rows);
  }
  nlohmann::json report{{"axis", to_string(c.ablate_axis)}, {"rows", rows_json(rows)}, {"pass", true}};
  if (c.ablate_axis == AblationAxis::Alpha) {
    const RunRow *one = nullptr, *two = nullptr;
    for (const auto& r : rows) {
      const double v = std::stod(r.label);
      if (v == 1.0) one = &r;
      if (v == 2.0) two = &r;
    }
    if (one && two) {
      report["assertion"] = "2 * mean_abs_advantage(alpha=2) <= mean_abs_advantage(alpha=1)";
      report["ratio"] = two->mean_abs_advantage / one->mean_abs_advantage;
      report["pass"] = 2.0 * two->mean_abs_advantage <= one->mean_abs_advantage;
    }
  }
  return finish(out, report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth numerical reward toolkit: training, roadmap, ablations and checks"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "JSON config file (flat schema)")->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--out", args.out_dir, "output directory");
    return sub;
  };
  auto* train = add_common(app.add_subcommand("train", "run one training experiment"));
  auto* roadmap = add_common(app.add_subcommand("roadmap", "run the optimization-mechanism matrix"));
  auto* ablate = add_common(app.add_subcommand("ablate", "sweep one configuration axis"));
  ablate->add_option("--axis", args.axis, "k_min, k_max, alpha, operator or estimator")->required();
  ablate->add_option("--values", args.values, "comma-separated values")->required();
  auto* theory = add_common(app.add_subcommand("verify-theory", "run the Monte-Carlo theory checks"));
  auto* verifiers = add_common(app.add_subcommand("verify-verifiers", "run the verifier check suite"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Mode mode = Mode::Train;
    if (*roadmap) mode = Mode::Roadmap;
    else if (*ablate) mode = Mode::Ablate;
    else if (*theory) mode = Mode::TheoryCheck;
    else if (*verifiers) mode = Mode::VerifierCheck;
    (void)train;

    const auto config = resolve(args, mode);
    const Outputs out(config);
    out.open("resolved_config.json") << dump_config(config);

    switch (mode) {
      case Mode::Train: return run_train(config, out);
      case Mode::Roadmap: return run_roadmap_mode(config, out);
      case Mode::Ablate: return run_ablate_mode(config, out);
      case Mode::TheoryCheck: return finish(out, run_theory_checks(config.trainer.seed));
      case Mode::VerifierCheck: return finish(out, run_verifier_checks());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
