// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lmlcc/common/text.hpp"
#include "lmlcc/diffkit/checkpoint.hpp"
#include "lmlcc/diffkit/grad_check.hpp"
#include "lmlcc/diffkit/ops.hpp"
#include "lmlcc/huwindow/window.hpp"
#include "lmlcc/labeling/consensus.hpp"
#include "lmlcc/labeling/split.hpp"
#include "lmlcc/metrics/metrics.hpp"
#include "lmlcc/network/trainer.hpp"
#include "lmlcc/phantom/phantom.hpp"
#include "lmlcc/semisup/pseudo_label.hpp"

using namespace lmlcc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) { return text::format_fixed(v, digits); }

// ---------------------------------------------------------------- labeling

MalignancyLabel table_oracle(const std::vector<int>& r) {
  static const std::map<std::array<int, 4>, MalignancyLabel> rows = {
      {{4, 4, 0, 0}, MalignancyLabel::Malignant}, {{4, 3, 1, 0}, MalignancyLabel::Malignant},
      {{4, 3, 0, 1}, MalignancyLabel::Malignant}, {{4, 2, 1, 1}, MalignancyLabel::Malignant},
      {{4, 0, 0, 4}, MalignancyLabel::Benign},    {{4, 0, 1, 3}, MalignancyLabel::Benign},
      {{4, 1, 0, 3}, MalignancyLabel::Benign},    {{4, 1, 1, 2}, MalignancyLabel::Benign},
      {{3, 3, 0, 0}, MalignancyLabel::Malignant}, {{3, 2, 1, 0}, MalignancyLabel::Malignant},
      {{3, 2, 0, 1}, MalignancyLabel::Malignant}, {{3, 0, 0, 3}, MalignancyLabel::Benign},
      {{3, 0, 1, 2}, MalignancyLabel::Benign},    {{3, 1, 0, 2}, MalignancyLabel::Benign},
      {{2, 2, 0, 0}, MalignancyLabel::Malignant}, {{2, 0, 0, 2}, MalignancyLabel::Benign},
  };
  int gt = 0, eq = 0, lt = 0;
  for (const int v : r) (v > 3 ? gt : v == 3 ? eq : lt)++;
  const auto it = rows.find({static_cast<int>(r.size()), gt, eq, lt});
  return it == rows.end() ? MalignancyLabel::Ambiguous : it->second;
}

MalignancyLabel mirrored(MalignancyLabel l) {
  if (l == MalignancyLabel::Malignant) return MalignancyLabel::Benign;
  if (l == MalignancyLabel::Benign) return MalignancyLabel::Malignant;
  return l;
}

Outcome criterion_labeling() {
  std::size_t sequences = 0, agree = 0, symmetric = 0;
  std::set<std::vector<int>> multisets;
  for (int len = 2; len <= 4; ++len) {
    std::vector<int> r(static_cast<std::size_t>(len), 1);
    while (true) {
      ++sequences;
      const auto got = consensus_label(r);
      if (got == table_oracle(r)) ++agree;
      std::vector<int> flipped;
      for (const int v : r) flipped.push_back(6 - v);
      if (consensus_label(flipped) == mirrored(got)) ++symmetric;
      auto sorted = r;
      std::sort(sorted.begin(), sorted.end());
      multisets.insert(sorted);
      std::size_t i = 0;
      while (i < r.size() && r[i] == 5) r[i++] = 1;
      if (i == r.size()) break;
      ++r[i];
    }
  }
  const bool pass = agree == sequences && symmetric == sequences && multisets.size() == 120;
  return {pass, std::to_string(agree) + "/" + std::to_string(sequences) + " ordered rating lists agree (" +
                    std::to_string(multisets.size()) + " multisets), mirror symmetry " + std::to_string(symmetric) +
                    "/" + std::to_string(sequences)};
}

// ---------------------------------------------------------------- gradients

diff::Tensor<double> rand_tensor(diff::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  diff::Tensor<double> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

// Distinct values spaced far above the probe step so no probe flips a max.
diff::Tensor<double> spaced_tensor(diff::Shape shape, std::uint64_t seed) {
  diff::Tensor<double> t(std::move(shape));
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 * static_cast<double>(order[i]) - 0.3;
  return t;
}

diff::Var<double> project(const diff::Var<double>& out, std::uint64_t seed) {
  return diff::sum(diff::mul(out, diff::constant(rand_tensor(out->value.shape(), seed ^ 0x5eed))));
}

Outcome criterion_gradients() {
  using namespace lmlcc::diff;
  std::map<std::string, double> worst;
  auto note = [&](const std::string& name, const GradCheckResult& r) {
    worst[name] = std::max(worst[name], r.max_rel_error);
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto x = parameter(rand_tensor({2, 2, 4, 4, 4}, seed), "x");
    auto k = parameter(rand_tensor({3, 2, 3, 3, 3}, seed + 100, -0.3, 0.3), "k");
    auto b = parameter(rand_tensor({3}, seed + 200), "b");
    note("conv3d", grad_check([&] { return project(conv3d(x, k, b), seed); }, {x, k, b}));

    auto xp = parameter(spaced_tensor({2, 2, 4, 4, 4}, seed), "xp");
    note("maxpool", grad_check([&] { return project(maxpool3d(xp), seed); }, {xp}));

    auto xb = parameter(rand_tensor({3, 2, 2, 2, 2}, seed + 300, -2, 2), "xb");
    auto g = parameter(rand_tensor({2}, seed + 400, 0.5, 1.5), "g");
    auto be = parameter(rand_tensor({2}, seed + 500), "be");
    note("batchnorm", grad_check(
                          [&] {
                            BatchNormState<double> st(2);
                            return project(batchnorm(xb, g, be, st, true), seed);
                          },
                          {xb, g, be}));
    note("batchnorm", grad_check(
                          [&] {
                            BatchNormState<double> st(2);
                            st.running_mean = rand_tensor({2}, seed + 600);
                            st.running_var = rand_tensor({2}, seed + 700, 0.5, 2.0);
                            return project(batchnorm(xb, g, be, st, false), seed);
                          },
                          {xb, g, be}));

    auto xl = parameter(rand_tensor({4, 5}, seed + 800), "xl");
    auto w = parameter(rand_tensor({3, 5}, seed + 900), "w");
    auto bl = parameter(rand_tensor({3}, seed + 1000), "bl");
    note("dense", grad_check([&] { return project(linear(xl, w, bl), seed); }, {xl, w, bl}));

    auto z = parameter(rand_tensor({6}, seed + 1100, -3, 3), "z");
    const Tensor<double> y(Shape{6}, std::vector<double>{1, 0, 1, 1, 0, 0});
    note("sigmoid+bce", grad_check([&] { return bce_loss(sigmoid(z), y); }, {z}));

    CutVector cv = CutVector::make(3, CutsInit::Random, CutsMode::Learnable, seed);
    auto xw = parameter(rand_tensor({2, 1, 3, 3, 3}, seed + 1200, 0.0, 1.0), "xw");
    auto theta = parameter(Tensor<double>(Shape{cv.theta.size()}, cv.theta), "theta");
    note("hu-window", grad_check([&] { return project(window_branches(xw, theta, cv.tau, true), seed); }, {theta}));
    note("hu-window", grad_check([&] { return project(window_branches(xw, theta, cv.tau, false), seed); }, {xw, theta}));

    // End to end, two learnable branches, train mode.
    LmlccConfig c;
    c.mode = ModelMode::Lmlcc;
    c.n_branches = 2;
    c.init = CutsInit::Random;
    c.backbone = BackboneConfig::desk(16);
    LmlccModel<double> m(c, 20 + seed);
    const auto batch = rand_tensor({4, 1, 16, 16, 16}, 40 + seed, 0.0, 1.0);
    const Tensor<double> labels(Shape{4}, std::vector<double>{1, 0, 0, 1});
    auto loss = [&] { return bce_loss(m.forward(batch, ForwardOptions{true, 7}).probs, labels); };
    std::vector<Var<double>> leaves;
    for (const auto& p : m.parameters()) {
      // Conv biases feeding train-mode batch norm cancel exactly (zero gradient).
      const bool pre_bn_bias = p.name.find(".conv") != std::string::npos && p.name.ends_with(".bias");
      if (!pre_bn_bias) leaves.push_back(p.var);
    }
    GradCheckOptions opt;
    opt.step = 1e-6;
    opt.max_coords_per_tensor = 6;
    opt.seed = seed;
    note("end-to-end", grad_check(loss, leaves, opt));
  }
  bool pass = true;
  std::string detail = "max rel error";
  for (const auto& [name, err] : worst) {
    pass = pass && err <= 1e-3;
    detail += " " + name + "=" + text::format_double(err);
  }
  return {pass, detail + " over 5 seeds"};
}

// ---------------------------------------------------------------- partition

Outcome criterion_partition() {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = u(rng);
  double worst_mask = 0.0, worst_recon = 0.0;
  for (const int n : {2, 3, 6, 11}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto cv = CutVector::make(n, CutsInit::Random, CutsMode::Learnable, 100 * n + seed);
      std::uniform_real_distribution<double> t(-3.0, 3.0);
      for (auto& th : cv.theta) th = t(rng);
      const auto bs = branch_forward(x, cv, false);
      for (std::size_t i = 0; i < x.size(); ++i) {
        double m = 0.0, r = 0.0;
        for (std::size_t b = 0; b < bs.count(); ++b) {
          m += bs.masks[b][i];
          r += bs.branches[b][i];
        }
        worst_mask = std::max(worst_mask, std::abs(m - 1.0));
        worst_recon = std::max(worst_recon, std::abs(r - x[i]));
      }
    }
  }
  return {worst_mask <= 1e-6 && worst_recon <= 1e-6,
          "max |sum masks - 1| = " + text::format_double(worst_mask) +
              ", max |sum branches - x| = " + text::format_double(worst_recon) + " (1e5 points, 12 cut draws)"};
}

// ---------------------------------------------------------------- metrics

double pairwise_auc(const std::vector<int>& labels, const std::vector<double>& probs) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      wins += probs[i] > probs[j] ? 1.0 : probs[i] == probs[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

Outcome criterion_auc() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 50), level(0, 3);
  double worst = 0.0;
  int tied = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<int> labels;
    std::vector<double> probs;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      labels.push_back(u(rng) < 0.5 ? 1 : 0);
      probs.push_back(k % 3 == 0 ? level(rng) / 3.0 : u(rng));
    }
    labels[0] = 1;
    labels[1] = 0;
    if (k % 3 == 0) ++tied;
    worst = std::max(worst, std::abs(roc_auc(labels, probs).auc - pairwise_auc(labels, probs)));
  }
  return {worst <= 1e-9, "max |trapezoid - pairwise| = " + text::format_double(worst) + " over 200 instances (" +
                             std::to_string(tied) + " heavy-tie)"};
}

Outcome criterion_confusion() {
  std::vector<int> labels;
  std::vector<double> probs;
  auto add = [&](int n, int label, double p) {
    for (int i = 0; i < n; ++i) {
      labels.push_back(label);
      probs.push_back(p);
    }
  };
  add(53, 1, 0.9);
  add(2, 1, 0.1);
  add(50, 0, 0.2);
  add(7, 0, 0.8);
  const auto rep = evaluate(labels, probs);
  const auto& m = rep.metrics;
  const double acc = *m.acc * 100.0, sen = *m.sen * 100.0, spe = *m.spe * 100.0;
  const bool pass = rep.counts == ConfusionCounts{53, 50, 7, 2} && std::abs(acc - 91.96) <= 0.01 &&
                    std::abs(sen - 96.36) <= 0.01 && std::abs(spe - 87.72) <= 0.01;
  return {pass, "tp=53 tn=50 fp=7 fn=2 -> acc " + fmt(acc, 2) + "%, sen " + fmt(sen, 2) + "%, spe " + fmt(spe, 2) +
                    "% (published sen/spe 92.94/94.07 disagree with these counts)"};
}

// ---------------------------------------------------------------- training

std::vector<int> labels_of(const std::vector<Patch>& patches) {
  std::vector<int> out;
  for (const auto& p : patches) out.push_back(*p.label);
  return out;
}

double accuracy(const std::vector<Patch>& patches, const std::vector<double>& probs) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < patches.size(); ++i) ok += (probs[i] >= 0.5) == (*patches[i].label == 1);
  return static_cast<double>(ok) / static_cast<double>(patches.size());
}

LmlccConfig backbone_config() {
  LmlccConfig c;
  c.mode = ModelMode::Backbone;
  c.n_branches = 1;
  c.backbone = BackboneConfig::desk(16);
  return c;
}

LmlccConfig lmlcc_config(int n, CutsMode cuts, CutsInit init = CutsInit::Constant, bool original = false) {
  LmlccConfig c;
  c.mode = ModelMode::Lmlcc;
  c.n_branches = n;
  c.cuts_mode = cuts;
  c.init = init;
  c.include_original = original;
  c.backbone = BackboneConfig::desk(16);
  return c;
}

TrainConfig phantom_train_config() {
  TrainConfig tc;
  tc.epochs = 12;
  tc.batch_size = 32;
  tc.lr = 1e-3;
  tc.seed = 71;
  tc.window_lr_scale = 10.0;
  return tc;
}

struct PhantomRun {
  PhantomDataset test_ds;
  std::vector<Patch> test;
  std::unique_ptr<LmlccModel<float>> backbone, learnable, fixed;
  double auc_backbone = 0, auc_learnable = 0, auc_fixed = 0;
  std::vector<double> cuts_before, cuts_after;
  double seconds = 0;
};

PhantomRun& phantom_run() {
  static std::unique_ptr<PhantomRun> run;
  if (run) return *run;
  run = std::make_unique<PhantomRun>();
  const auto t0 = std::chrono::steady_clock::now();
  const auto train_set = to_patches(generate_dataset(160, 160, 16, 1, false, "tr"));
  const auto val_set = to_patches(generate_dataset(40, 40, 16, 3, false, "va"));
  run->test_ds = generate_dataset(40, 40, 16, 2, false, "te");
  run->test = to_patches(run->test_ds);
  const auto tc = phantom_train_config();
  const auto labels = labels_of(run->test);
  auto fit = [&](const LmlccConfig& c, double& auc) {
    auto m = std::make_unique<LmlccModel<float>>(c, 70);
    train(*m, train_set, val_set, tc);
    auc = roc_auc(labels, predict(*m, run->test)).auc;
    return m;
  };
  run->backbone = fit(backbone_config(), run->auc_backbone);
  run->cuts_before = LmlccModel<float>(lmlcc_config(2, CutsMode::Learnable), 70).cuts();
  run->learnable = fit(lmlcc_config(2, CutsMode::Learnable), run->auc_learnable);
  run->cuts_after = run->learnable->cuts();
  run->fixed = fit(lmlcc_config(2, CutsMode::Fixed), run->auc_fixed);
  run->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return *run;
}

Outcome criterion_phantom() {
  auto& r = phantom_run();
  double moved = 0.0;
  for (std::size_t i = 0; i < r.cuts_after.size(); ++i) moved = std::max(moved, std::abs(r.cuts_after[i] - r.cuts_before[i]));
  const bool a = r.auc_backbone >= 0.90;
  const bool b = r.auc_learnable >= 0.90 && moved >= 1e-3;
  const bool c = r.auc_learnable >= r.auc_fixed - 0.02;
  const bool t = r.seconds < 900.0;
  return {a && b && c && t, std::string("(a) backbone AUC ") + fmt(r.auc_backbone) + (a ? " ok" : " LOW") +
                                "; (b) learnable N=2 AUC " + fmt(r.auc_learnable) + ", cut 0.5000 -> " +
                                fmt(r.cuts_after.at(0)) + (b ? " ok" : " FAILED") + "; (c) fixed AUC " +
                                fmt(r.auc_fixed) + (c ? " ok" : " FAILED") + "; " + fmt(r.seconds, 1) + " s"};
}

// ---------------------------------------------------------------- semisup

Outcome criterion_semisup() {
  const auto train_set = to_patches(generate_dataset(50, 50, 16, 11, false, "tr"));
  const auto val_set = to_patches(generate_dataset(20, 20, 16, 12, false, "va"));
  const auto test_set = to_patches(generate_dataset(50, 50, 16, 13, false, "te"));
  const auto pool = to_patches(generate_dataset(150, 150, 16, 14, true, "un"));

  std::vector<ManifestEntry> manifest;
  for (const auto& p : train_set) manifest.push_back({p.nodule_id, SplitRole::Train, p.label});
  for (const auto& p : val_set) manifest.push_back({p.nodule_id, SplitRole::Val, p.label});
  for (const auto& p : test_set) manifest.push_back({p.nodule_id, SplitRole::Test, p.label});
  for (const auto& p : pool) manifest.push_back({p.nodule_id, SplitRole::Unlabeled, std::nullopt});
  auto held_out = [](const std::vector<ManifestEntry>& m) {
    std::vector<ManifestEntry> keep;
    for (const auto& e : m)
      if (e.split == SplitRole::Val || e.split == SplitRole::Test) keep.push_back(e);
    return format_manifest(keep);
  };
  const auto before = held_out(manifest);

  bool structural = true;
  int accuracy_ok = 0;
  std::string detail;
  for (std::uint64_t rep = 0; rep < 3; ++rep) {
    TrainConfig tc;
    tc.epochs = 20;
    tc.batch_size = 16;
    tc.lr = 1e-3;
    tc.seed = 300 + rep;
    SemisupConfig sc;
    sc.threshold = 0.9;
    sc.max_rounds = 10;
    sc.min_new = 5;
    const auto res = semisup_loop(train_set, val_set, pool, backbone_config(), tc, sc);

    const bool rounds_ok = !res.rounds.empty() && res.rounds.size() <= 10;
    const bool monotone = std::is_sorted(res.train_sizes.begin(), res.train_sizes.end());
    std::vector<ManifestEntry> after;
    for (const auto& e : merge_pseudo_labels(manifest, res.pseudo_labels)) after.push_back(e.entry);
    const bool manifests_same = held_out(after) == before;
    structural = structural && rounds_ok && monotone && manifests_same;

    auto final_model = LmlccModel<float>::from_checkpoint(res.final_checkpoint);
    auto sup_model = LmlccModel<float>::from_checkpoint(res.supervised_checkpoint);
    const double acc_final = accuracy(test_set, predict(final_model, test_set));
    const double acc_sup = accuracy(test_set, predict(sup_model, test_set));
    if (acc_final >= acc_sup - 0.01) ++accuracy_ok;

    std::size_t correct_pseudo = 0;
    for (const auto& pl : res.pseudo_labels) {
      const auto idx = static_cast<std::size_t>(std::stoul(pl.nodule_id.substr(2)));
      correct_pseudo += pl.label == (idx < 150 ? 0 : 1);
    }
    detail += "; repeat " + std::to_string(rep + 1) + ": " + std::to_string(res.rounds.size()) + " rounds, sizes";
    for (const auto s : res.train_sizes) detail += " " + std::to_string(s);
    detail += ", pseudo-labels " + std::to_string(correct_pseudo) + "/" + std::to_string(res.pseudo_labels.size()) +
              " correct, test acc " + fmt(acc_sup * 100, 1) + "% -> " + fmt(acc_final * 100, 1) + "%" +
              (manifests_same ? "" : ", held-out manifest CHANGED") + (monotone ? "" : ", sizes NOT monotone");
  }
  return {structural && accuracy_ok >= 2,
          std::to_string(accuracy_ok) + "/3 repeats keep accuracy within 1 point of supervised" + detail};
}

// ---------------------------------------------------------------- determinism

Outcome criterion_determinism() {
  const auto train_set = to_patches(generate_dataset(40, 40, 16, 21, false, "tr"));
  const auto val_set = to_patches(generate_dataset(10, 10, 16, 22, false, "va"));
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 16;
  tc.lr = 1e-3;
  tc.seed = 5;
  tc.window_lr_scale = 10.0;
  const auto cfg = lmlcc_config(2, CutsMode::Learnable, CutsInit::Random, true);
  LmlccModel<float> a(cfg, 9), b(cfg, 9);
  const auto log_a = format_epoch_log(train(a, train_set, val_set, tc).log);
  const auto log_b = format_epoch_log(train(b, train_set, val_set, tc).log);
  const bool logs_same = log_a == log_b;

  const auto dir = fs::temp_directory_path() / ("lmlcc_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  diff::write_checkpoint(dir / "model.ckpt", a.to_checkpoint());
  auto loaded = LmlccModel<float>::from_checkpoint(diff::read_checkpoint(dir / "model.ckpt"));
  fs::remove_all(dir);
  const auto p_before = predict(a, val_set);
  const auto p_after = predict(loaded, val_set);
  const bool exact = p_before == p_after;
  return {logs_same && exact, std::string("5-epoch loss log ") + (logs_same ? "identical" : "DIFFERS") +
                                  " across runs; checkpoint reload predictions " +
                                  (exact ? "bit-exact" : "DIFFER") + " on " + std::to_string(p_after.size()) +
                                  " patches"};
}

// ---------------------------------------------------------------- grad-cam

struct CamStats {
  bool well_formed = true;
  std::size_t correct = 0;
  std::size_t concentrated = 0;
};

CamStats cam_stats(LmlccModel<float>& model, const PhantomDataset& ds, const std::vector<Patch>& patches) {
  CamStats s;
  const auto probs = predict(model, patches);
  const std::size_t side = ds.side;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto heat = grad_cam(model, patches[i]);
    if (heat.size() != side * side * side) s.well_formed = false;
    for (const float v : heat)
      if (!(v >= 0.0f) || !std::isfinite(v)) s.well_formed = false;
    if ((probs[i] >= 0.5) != (*patches[i].label == 1)) continue;
    ++s.correct;
    double in = 0.0, total = 0.0;
    const auto& ph = ds.cases[i].phantom;
    for (std::size_t z = 0; z < side; ++z)
      for (std::size_t y = 0; y < side; ++y)
        for (std::size_t x = 0; x < side; ++x) {
          const double v = heat[x + side * (y + side * z)];
          total += v;
          if (ph.in_bbox(x, y, z)) in += v;
        }
    if (total > 0.0 && in / total > 0.5) ++s.concentrated;
  }
  return s;
}

Outcome criterion_gradcam() {
  auto& r = phantom_run();
  const auto lm = cam_stats(*r.learnable, r.test_ds, r.test);
  const auto bb = cam_stats(*r.backbone, r.test_ds, r.test);
  const double frac = lm.correct ? static_cast<double>(lm.concentrated) / static_cast<double>(lm.correct) : 0.0;
  const double frac_bb = bb.correct ? static_cast<double>(bb.concentrated) / static_cast<double>(bb.correct) : 0.0;
  return {lm.well_formed && bb.well_formed && frac >= 0.8,
          "LMLCC N=2: " + std::to_string(lm.concentrated) + "/" + std::to_string(lm.correct) + " (" +
              fmt(frac * 100, 1) + "%) correct test phantoms with >50% heat in the nodule box; backbone (informational) " +
              std::to_string(bb.concentrated) + "/" + std::to_string(bb.correct) + " (" + fmt(frac_bb * 100, 1) +
              "%); maps " + (lm.well_formed && bb.well_formed ? "non-negative and patch-shaped" : "MALFORMED")};
}

// ---------------------------------------------------------------- config sweep

Outcome criterion_configs() {
  const auto train_set = to_patches(generate_dataset(12, 12, 16, 31, false, "tr"));
  const auto val_set = to_patches(generate_dataset(4, 4, 16, 32, false, "va"));
  const auto test_set = to_patches(generate_dataset(4, 4, 16, 33, false, "te"));
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  tc.lr = 1e-3;
  tc.seed = 1;
  int ok = 0, total = 0;
  std::string failures;
  for (const int n : {2, 3, 6, 11})
    for (const auto init : {CutsInit::Constant, CutsInit::Random})
      for (const auto cuts : {CutsMode::Learnable, CutsMode::Fixed})
        for (const bool original : {false, true}) {
          ++total;
          const std::string name = "N=" + std::to_string(n) + "/" + to_string(init) + "/" + to_string(cuts) +
                                   (original ? "/+orig" : "");
          try {
            LmlccModel<float> m(lmlcc_config(n, cuts, init, original), 50 + static_cast<std::uint64_t>(total));
            const auto res = train(m, train_set, val_set, tc);
            const auto probs = predict(m, test_set);
            const auto rep = evaluate(labels_of(test_set), probs);
            const bool finite = std::all_of(probs.begin(), probs.end(), [](double p) { return std::isfinite(p); });
            if (res.log.size() == 2 && finite && std::isfinite(rep.auc)) {
              ++ok;
            } else {
              failures += " " + name;
            }
          } catch (const std::exception& e) {
            failures += " " + name + " (" + e.what() + ")";
          }
        }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " configurations built, trained 2 epochs and evaluated" +
                           (failures.empty() ? "" : "; failed:" + failures)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "labeler oracle equivalence", criterion_labeling},
      {2, "gradient correctness", criterion_gradients},
      {3, "partition of unity", criterion_partition},
      {4, "AUC oracle", criterion_auc},
      {5, "metric arithmetic", criterion_confusion},
      {6, "phantom end-to-end", criterion_phantom},
      {7, "semi-supervised loop", criterion_semisup},
      {8, "determinism and persistence", criterion_determinism},
      {9, "Grad-CAM sanity", criterion_gradcam},
      {10, "configuration-space smoke", criterion_configs},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.id == 1 && secs >= 1.0) o.pass = false;
    if (c.id == 2 && secs >= 120.0) o.pass = false;
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-30s %s  %s [%.1f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
