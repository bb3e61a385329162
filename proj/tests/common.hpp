#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "inlu/corpus.hpp"
#include "inlu/pipeline.hpp"

namespace testing {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kSplitSeed = 2019;
inline constexpr std::uint64_t kModelSeed = 7;

inline fs::path data_dir() { return INLU_DATA_DIR; }

inline const inlu::TrainingDataset& snips() {
  static const inlu::TrainingDataset data = inlu::load_json(data_dir() / "snips_subset.json");
  return data;
}

inline const std::pair<inlu::TrainingDataset, inlu::TrainingDataset>& snips_split() {
  static const auto split = inlu::stratified_split(snips(), 0.2, kSplitSeed);
  return split;
}

// Default pipeline with the SIUM smoothing used for evaluation.
inline inlu::PipelineConfig eval_config() {
  inlu::PipelineConfig config = inlu::default_config();
  for (auto& c : config.components) {
    if (c.name == "intent_sium") c.params["alpha"] = "0.1";
  }
  return config;
}

inline std::shared_ptr<const inlu::ModelBundle> snips_bundle() {
  static const auto bundle =
      inlu::ModelBundle::train(eval_config(), snips_split().first, kModelSeed);
  return bundle;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("inlu-test-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

}  // namespace testing
