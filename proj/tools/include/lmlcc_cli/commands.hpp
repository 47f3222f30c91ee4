#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmlcc/common/kv.hpp"
#include "lmlcc/network/config.hpp"

namespace lmlcc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumerical = 3 };

struct LabelArgs {
  std::filesystem::path ratings;
  std::filesystem::path out_manifest;
  std::uint64_t seed = 0;
};

struct PreprocessArgs {
  std::filesystem::path ratings;
  std::filesystem::path manifest;
  std::filesystem::path volumes;
  std::filesystem::path out_dir;
  int side = 16;
  /// "sx,sy,sz" in mm, or "none" to keep the native grid.
  std::string target_spacing = "0.7,0.7,1";
  bool augment = true;
};

struct ModelArgs {
  std::string mode = "lmlcc";
  int branches = 3;
  std::string init = "constant";
  std::string cuts = "learnable";
  bool include_original = false;
  std::string scale = "desk";
  double tau = 0.05;
};

struct TrainArgs {
  std::filesystem::path cache_dir;
  std::filesystem::path out_dir;
  ModelArgs model;
  TrainConfig train;
};

struct PseudolabelArgs {
  std::filesystem::path cache_dir;
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  ModelArgs model;
  TrainConfig train;
  double threshold = 0.9;
  int max_rounds = 10;
  int min_new = 5;
};

struct EvaluateArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path cache_dir;
  std::string split = "test";
  std::filesystem::path out_dir;
  double threshold = 0.5;
};

struct GradcamArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path cache_dir;
  std::string split = "test";
  std::filesystem::path out_dir;
  /// Number of patches to explain; 0 means all.
  int limit = 0;
};

struct PhantomArgs {
  std::filesystem::path out_dir;
  int benign = 200;
  int malignant = 200;
  /// Extra cases whose labels are withheld from the ratings.
  int ambiguous = 0;
  int side = 16;
  std::uint64_t seed = 0;
};

/// Builds the model configuration; throws ConfigError on invalid combinations.
LmlccConfig make_model_config(const ModelArgs& args, int patch_side);

KeyValues resolved(const LabelArgs& a);
KeyValues resolved(const PreprocessArgs& a);
KeyValues resolved(const TrainArgs& a);
KeyValues resolved(const PseudolabelArgs& a);
KeyValues resolved(const EvaluateArgs& a);
KeyValues resolved(const GradcamArgs& a);
KeyValues resolved(const PhantomArgs& a);

void cmd_label(const LabelArgs& a, std::ostream& out);
void cmd_preprocess(const PreprocessArgs& a, std::ostream& out);
void cmd_train(const TrainArgs& a, std::ostream& out);
void cmd_pseudolabel(const PseudolabelArgs& a, std::ostream& out);
void cmd_evaluate(const EvaluateArgs& a, std::ostream& out);
void cmd_gradcam(const GradcamArgs& a, std::ostream& out);
void cmd_phantom(const PhantomArgs& a, std::ostream& out);

/// Parses `args` (without the program name), applies `--config` file values
/// under explicit flags, falls back to LMLCC_SEED for the seed, runs the
/// command and maps failures to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmlcc::cli
