#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "lmlcc/common/text.hpp"
#include "lmlcc/diffkit/checkpoint.hpp"
#include "lmlcc/ingest/ratings.hpp"
#include "lmlcc/network/model.hpp"
#include "lmlcc_cli/commands.hpp"
#include "support.hpp"

using namespace lmlcc;
using lmlcc::test::read_text;
using lmlcc::test::TempDir;
using lmlcc::test::write_text;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& x) { return x.string(); }

double report_auc(const fs::path& report_csv) {
  const auto lines = text::split(text::trim(read_text(report_csv)), '\n');
  REQUIRE(lines.size() == 2);
  const auto head = text::split(lines[0], ',');
  const auto vals = text::split(lines[1], ',');
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (text::trim(head[i]) == "auc") return text::parse_double(vals[i], "auc");
  }
  FAIL("no auc column");
  return 0.0;
}

// Phantoms, labels and a non-augmented patch cache at native spacing.
void build_cache(const TempDir& t, int per_class) {
  const auto n = std::to_string(per_class);
  REQUIRE(run({"phantom", "--out-dir", p(t / "ph"), "--benign", n, "--malignant", n, "--ambiguous", "6", "--seed", "3"})
              .code == 0);
  REQUIRE(run({"label", "--ratings", p(t / "ph" / "ratings.csv"), "--out-manifest", p(t / "manifest.csv"), "--seed",
               "11"})
              .code == 0);
  const auto r = run({"preprocess", "--ratings", p(t / "ph" / "ratings.csv"), "--manifest", p(t / "manifest.csv"),
                      "--volumes", p(t / "ph" / "volumes"), "--out-dir", p(t / "cache"), "--target-spacing", "none",
                      "--augment", "false"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("label prints counts and writes a reproducible manifest") {
  TempDir t("cli_label");
  REQUIRE(run({"phantom", "--out-dir", p(t / "ph"), "--benign", "10", "--malignant", "12", "--ambiguous", "4"}).code ==
          0);
  const auto a = run({"label", "--ratings", p(t / "ph" / "ratings.csv"), "--out-manifest", p(t / "a.csv"), "--seed", "5"});
  const auto b = run({"label", "--ratings", p(t / "ph" / "ratings.csv"), "--out-manifest", p(t / "b.csv"), "--seed", "5"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find("benign 10\nmalignant 12\nambiguous 4\n") != std::string::npos);
  CHECK(a.out.find("seed = 5\n") != std::string::npos);
  CHECK(read_text(t / "a.csv") == read_text(t / "b.csv"));
  CHECK_FALSE(read_text(t / "a.csv").empty());
}

TEST_CASE("malformed ratings row is reported with its line number") {
  TempDir t("cli_bad");
  write_text(t / "r.csv", std::string(kRatingsHeader) + "\ns1,n1,0,0,0,5,1|2\ns1,n2,0,0,0,5\n");
  const auto r = run({"label", "--ratings", p(t / "r.csv"), "--out-manifest", p(t / "m.csv")});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK_FALSE(fs::exists(t / "m.csv"));
}

TEST_CASE("missing input file names the path") {
  TempDir t("cli_missing");
  const auto missing = p(t / "nope.csv");
  const auto r = run({"label", "--ratings", missing, "--out-manifest", p(t / "m.csv")});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find(missing) != std::string::npos);

  const auto e = run({"evaluate", "--checkpoint", p(t / "none.ckpt"), "--cache-dir", p(t.path()), "--out-dir",
                      p(t / "ev")});
  CHECK(e.code == cli::kDataError);
  CHECK(e.err.find("none.ckpt") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  TempDir t("cli_usage");
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"label", "--out-manifest", "x"}).code == cli::kUsage);
  CHECK(run({"phantom", "--out-dir", p(t / "ph"), "--benign", "-1"}).code == cli::kUsage);

  write_text(t / "cfg.txt", "ratings = r.csv\nout_manifest = m.csv\nlearning_speed = 3\n");
  const auto r = run({"label", "--config", p(t / "cfg.txt")});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("learning_speed") != std::string::npos);
}

TEST_CASE("config file values yield to explicit flags") {
  TempDir t("cli_config");
  REQUIRE(run({"phantom", "--out-dir", p(t / "ph"), "--benign", "6", "--malignant", "6"}).code == 0);
  write_text(t / "cfg.txt", "ratings = " + p(t / "ph" / "ratings.csv") + "\nout_manifest = " + p(t / "m.csv") +
                                "\nseed = 9\n");
  const auto a = run({"label", "--config", p(t / "cfg.txt")});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("seed = 9\n") != std::string::npos);
  const auto b = run({"label", "--config", p(t / "cfg.txt"), "--seed", "4"});
  REQUIRE(b.code == 0);
  CHECK(b.out.find("seed = 4\n") != std::string::npos);
}

TEST_CASE("seed falls back to the environment") {
  TempDir t("cli_env");
  REQUIRE(run({"phantom", "--out-dir", p(t / "ph"), "--benign", "6", "--malignant", "6"}).code == 0);
  ::setenv("LMLCC_SEED", "77", 1);
  const auto a = run({"label", "--ratings", p(t / "ph" / "ratings.csv"), "--out-manifest", p(t / "a.csv")});
  const auto b = run({"label", "--ratings", p(t / "ph" / "ratings.csv"), "--out-manifest", p(t / "b.csv"), "--seed",
                      "3"});
  ::unsetenv("LMLCC_SEED");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find("seed = 77\n") != std::string::npos);
  CHECK(b.out.find("seed = 3\n") != std::string::npos);
}

TEST_CASE("invalid model combination is rejected before training") {
  TempDir t("cli_combo");
  build_cache(t, 8);
  const auto r = run({"train", "--cache-dir", p(t / "cache"), "--out-dir", p(t / "run"), "--mode", "backbone",
                      "--include-original", "true", "--epochs", "1"});
  CHECK(r.code == cli::kUsage);
  CHECK_FALSE(fs::exists(t / "run" / "model.ckpt"));
  CHECK(run({"train", "--cache-dir", p(t / "cache"), "--out-dir", p(t / "run"), "--epochs", "0"}).code == cli::kUsage);
  CHECK(run({"train", "--cache-dir", p(t / "cache"), "--out-dir", p(t / "run"), "--branches", "0"}).code ==
        cli::kUsage);
}

TEST_CASE("phantom to report pipeline") {
  TempDir t("cli_pipe");
  build_cache(t, 20);
  for (const char* split : {"train", "val", "test", "unlabeled"}) {
    CHECK(fs::exists(t / "cache" / (std::string(split) + ".patches")));
  }
  const auto tr = run({"train", "--cache-dir", p(t / "cache"), "--out-dir", p(t / "run"), "--branches", "2",
                       "--epochs", "2", "--batch-size", "8", "--seed", "1"});
  REQUIRE_MESSAGE(tr.code == 0, tr.err);
  CHECK(fs::exists(t / "run" / "model.ckpt"));
  CHECK(fs::exists(t / "run" / "epoch_log.csv"));
  CHECK(read_text(t / "run" / "resolved_config.txt").find("branches") != std::string::npos);

  const auto ev = run({"evaluate", "--checkpoint", p(t / "run" / "model.ckpt"), "--cache-dir", p(t / "cache"),
                       "--out-dir", p(t / "ev")});
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  CHECK(ev.out.find("accuracy") != std::string::npos);
  CHECK(ev.out.find("cuts") != std::string::npos);
  const double auc = report_auc(t / "ev" / "report.csv");
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
  CHECK(fs::exists(t / "ev" / "roc.csv"));
  CHECK(fs::exists(t / "ev" / "predictions.csv"));

  const auto ev2 = run({"evaluate", "--checkpoint", p(t / "run" / "model.ckpt"), "--cache-dir", p(t / "cache"),
                        "--out-dir", p(t / "ev2")});
  REQUIRE(ev2.code == 0);
  CHECK(read_text(t / "ev" / "report.csv") == read_text(t / "ev2" / "report.csv"));

  const auto gc = run({"gradcam", "--checkpoint", p(t / "run" / "model.ckpt"), "--cache-dir", p(t / "cache"),
                       "--out-dir", p(t / "gc"), "--limit", "2"});
  REQUIRE_MESSAGE(gc.code == 0, gc.err);
  CHECK(text::split(text::trim(read_text(t / "gc" / "gradcam.csv")), '\n').size() == 3);

  const auto unl = run({"evaluate", "--checkpoint", p(t / "run" / "model.ckpt"), "--cache-dir", p(t / "cache"),
                        "--split", "unlabeled", "--out-dir", p(t / "ev3")});
  CHECK(unl.code == cli::kUsage);
}

TEST_CASE("pseudolabel command writes history and merged manifest") {
  TempDir t("cli_pl");
  build_cache(t, 12);
  const auto r = run({"pseudolabel", "--cache-dir", p(t / "cache"), "--manifest", p(t / "manifest.csv"), "--out-dir",
                      p(t / "pl"), "--mode", "backbone", "--epochs", "1", "--batch-size", "8", "--max-rounds", "2",
                      "--threshold", "0.6", "--min-new", "1"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(t / "pl" / "resolved_config.txt"));
  CHECK(text::split(text::trim(read_text(t / "pl" / "rounds.csv")), '\n').size() >= 2);
  const auto merged = read_text(t / "pl" / "pseudo_manifest.csv");
  CHECK(merged.find("radiologist") != std::string::npos);
}

TEST_CASE("untrained model scores near chance") {
  TempDir t("cli_chance");
  build_cache(t, 100);
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cli::ModelArgs m;
    m.init = "random";
    const auto cfg = cli::make_model_config(m, 16);
    LmlccModel<float> model(cfg, seed);
    const auto ckpt = t / ("m" + std::to_string(seed) + ".ckpt");
    diff::write_checkpoint(ckpt, model.to_checkpoint());
    const auto out = t / ("ev" + std::to_string(seed));
    const auto r = run({"evaluate", "--checkpoint", p(ckpt), "--cache-dir", p(t / "cache"), "--out-dir", p(out)});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const double auc = report_auc(out / "report.csv");
    MESSAGE("seed " << seed << " auc " << auc);
    sum += auc;
  }
  const double mean = sum / 5.0;
  CHECK(mean >= 0.3);
  CHECK(mean <= 0.7);
}

TEST_SUITE_END();
