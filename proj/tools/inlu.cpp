// inlu: train, evaluate, batch parse, and word-stream front end.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inlu/corpus.hpp"
#include "inlu/errors.hpp"
#include "inlu/harness.hpp"
#include "inlu/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kCheckFailed = 2;

constexpr std::string_view kRevoke = "<REVOKE>";

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  double holdout = 0.0;
  std::string holdout_out;
};

struct EvalArgs {
  std::string model;
  std::string test;
  double noise_rate = 0.4;
  std::uint64_t seed = 0;
  std::string report;
};

struct ModelArgs {
  std::string model;
  std::string text;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw inlu::DataError("cannot write '" + path + "'");
  out << content;
}

int cmd_train(const TrainArgs& args) {
  const inlu::PipelineConfig config =
      args.config.empty() ? inlu::default_config() : inlu::PipelineConfig::load(args.config);
  inlu::TrainingDataset data = inlu::load_dataset(args.data);
  for (const std::string& w : data.warnings()) std::cerr << "warning: " << w << '\n';

  if (args.holdout > 0.0) {
    auto [train, test] = inlu::stratified_split(data, args.holdout, args.seed);
    if (!args.holdout_out.empty()) write_file(args.holdout_out, inlu::to_json(test));
    std::cout << "split: " << train.size() << " train / " << test.size() << " held out (seed "
              << args.seed << ")\n";
    data = std::move(train);
  }

  inlu::TrainingReport report;
  const auto start = std::chrono::steady_clock::now();
  auto bundle = inlu::ModelBundle::train(config, data, args.seed, &report);
  bundle->persist(args.out);
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& [name, seconds] : report.component_seconds) {
    std::printf("%-28s %9.3f s\n", name.c_str(), seconds);
  }
  std::printf("%-28s %9.3f s\n", "total (incl. persist)", total);
  std::printf("model written to %s\n", args.out.c_str());
  return kOk;
}

int cmd_eval(const EvalArgs& args) {
  auto bundle = inlu::ModelBundle::load(args.model);
  const inlu::TrainingDataset test = inlu::load_dataset(args.test);

  std::vector<double> rates{args.noise_rate};
  for (double boundary : {0.0, 1.0}) {
    if (boundary != args.noise_rate) rates.push_back(boundary);
  }
  const inlu::EvalReport report = inlu::evaluate(bundle, test, rates, args.seed);

  std::cout << report.to_table();
  if (!args.report.empty()) write_file(args.report, report.to_key_values());
  return report.all_checks_passed() ? kOk : kCheckFailed;
}

int cmd_parse(const ModelArgs& args) {
  inlu::Interpreter interpreter = inlu::Interpreter::load(args.model);
  if (!args.text.empty()) {
    std::cout << inlu::format_result_line(interpreter.parse_batch(args.text)) << '\n';
    return kOk;
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    std::cout << inlu::format_result_line(interpreter.parse_batch(line)) << '\n' << std::flush;
  }
  return kOk;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int cmd_stream(const ModelArgs& args) {
  inlu::Interpreter interpreter = inlu::Interpreter::load(args.model);
  std::string line;
  while (std::getline(std::cin, line)) {
    const std::string_view input = trim(line);
    if (input.empty()) {
      interpreter.new_utterance();
      continue;
    }
    try {
      const inlu::NluResult result =
          input == kRevoke ? interpreter.revoke() : interpreter.add(input);
      std::cout << inlu::format_result_line(result) << '\n';
    } catch (const inlu::UnderflowError& e) {
      std::cout << "error\t" << e.what() << '\n';
    } catch (const inlu::InvalidPayloadError& e) {
      std::cout << "error\t" << e.what() << '\n';
    }
    std::cout.flush();
    if (interpreter.blackboard().utterance_complete()) interpreter.new_utterance();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental NLU pipeline"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a pipeline and persist the model bundle");
  train_cmd->add_option("--config", train.config, "Pipeline config (default: all components)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train.data, "Training data (.json or .md)")->required();
  train_cmd->add_option("--out", train.out, "Output bundle directory")->required();
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--holdout", train.holdout,
                        "Stratified test fraction held out of training")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--holdout-out", train.holdout_out, "Write held-out examples (JSON)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Equivalence, revoke-noise and F1 evaluation");
  eval_cmd->add_option("--model", eval.model, "Bundle directory")->required();
  eval_cmd->add_option("--test", eval.test, "Test data (.json or .md)")->required();
  eval_cmd->add_option("--noise-rate", eval.noise_rate, "Noise insertion rate in [0, 1]");
  eval_cmd->add_option("--seed", eval.seed, "Noise seed");
  eval_cmd->add_option("--report", eval.report, "Write key=value report here");

  ModelArgs parse;
  auto* parse_cmd = app.add_subcommand("parse", "Non-incremental parse, one utterance per line");
  parse_cmd->add_option("--model", parse.model, "Bundle directory")->required();
  parse_cmd->add_option("--text", parse.text, "Parse this utterance instead of reading stdin");

  ModelArgs stream;
  auto* stream_cmd = app.add_subcommand("stream", "Word-per-line incremental protocol on stdin");
  stream_cmd->add_option("--model", stream.model, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) {
      if (!(eval.noise_rate >= 0.0 && eval.noise_rate <= 1.0)) {
        std::cerr << "error: --noise-rate must lie in [0, 1]\n";
        return kUsage;
      }
      return cmd_eval(eval);
    }
    if (*parse_cmd) return cmd_parse(parse);
    if (*stream_cmd) return cmd_stream(stream);
  } catch (const inlu::ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
