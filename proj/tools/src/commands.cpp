#include "lmlcc_cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/seed.hpp"
#include "lmlcc/common/text.hpp"
#include "lmlcc/diffkit/checkpoint.hpp"
#include "lmlcc/ingest/metaimage.hpp"
#include "lmlcc/ingest/ratings.hpp"
#include "lmlcc/labeling/consensus.hpp"
#include "lmlcc/labeling/split.hpp"
#include "lmlcc/metrics/metrics.hpp"
#include "lmlcc/network/trainer.hpp"
#include "lmlcc/phantom/phantom.hpp"
#include "lmlcc/preprocess/patch_cache.hpp"
#include "lmlcc/semisup/pseudo_label.hpp"

namespace lmlcc::cli {
namespace fs = std::filesystem;
namespace {

std::string b(bool v) { return v ? "true" : "false"; }
std::string d(double v) { return text::format_double(v); }

void put_model(KeyValues& kv, const ModelArgs& m) {
  kv["mode"] = m.mode;
  kv["branches"] = std::to_string(m.branches);
  kv["init"] = m.init;
  kv["cuts"] = m.cuts;
  kv["include_original"] = b(m.include_original);
  kv["scale"] = m.scale;
  kv["tau"] = d(m.tau);
}

void put_train(KeyValues& kv, const TrainConfig& t) {
  kv["epochs"] = std::to_string(t.epochs);
  kv["batch_size"] = std::to_string(t.batch_size);
  kv["lr"] = d(t.lr);
  kv["lr_floor"] = d(t.lr_floor);
  kv["plateau_factor"] = d(t.plateau_factor);
  kv["plateau_patience"] = std::to_string(t.plateau_patience);
  kv["early_stop_patience"] = std::to_string(t.early_stop_patience);
  kv["window_lr_scale"] = d(t.window_lr_scale);
  kv["seed"] = std::to_string(t.seed);
}

void echo(const KeyValues& kv, std::ostream& out, const fs::path& out_dir = {}) {
  out << "# resolved configuration\n" << format_key_values(kv);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / "resolved_config.txt", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (out_dir / "resolved_config.txt").string());
    f << format_key_values(kv);
  }
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("file not found: " + p.string());
}

std::vector<Patch> load_split(const fs::path& cache_dir, const std::string& split) {
  const auto path = cache_dir / (split + ".patches");
  require_file(path);
  return read_patch_cache(path);
}

int side_of(const std::vector<Patch>& patches, const char* what) {
  if (patches.empty()) throw InsufficientDataError(std::string(what) + " patch cache is empty");
  return static_cast<int>(patches.front().side);
}

LmlccModel<float> load_model(const fs::path& checkpoint) {
  require_file(checkpoint);
  return LmlccModel<float>::from_checkpoint(diff::read_checkpoint(checkpoint));
}

std::string cuts_line(const std::vector<double>& cuts) {
  std::string s;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (i) s += "; ";
    s += text::format_fixed(cuts[i], 4) + " (" + text::format_fixed(kHuLow + (kHuHigh - kHuLow) * cuts[i], 1) + " HU)";
  }
  return s.empty() ? "(none)" : s;
}

}  // namespace

LmlccConfig make_model_config(const ModelArgs& a, int patch_side) {
  LmlccConfig c;
  c.mode = parse_model_mode(a.mode);
  c.n_branches = a.branches;
  c.init = parse_cuts_init(a.init);
  c.cuts_mode = parse_cuts_mode(a.cuts);
  c.include_original = a.include_original;
  c.tau = a.tau;
  const auto scale = parse_backbone_scale(a.scale);
  c.backbone = scale == BackboneScale::Full ? BackboneConfig::full(patch_side) : BackboneConfig::desk(patch_side);
  if (c.mode == ModelMode::Backbone && a.include_original) {
    throw ConfigError("--include-original requires --mode lmlcc");
  }
  c.validate();
  return c;
}

KeyValues resolved(const LabelArgs& a) {
  return {{"ratings", a.ratings.string()}, {"out_manifest", a.out_manifest.string()}, {"seed", std::to_string(a.seed)}};
}

KeyValues resolved(const PreprocessArgs& a) {
  return {{"ratings", a.ratings.string()},     {"manifest", a.manifest.string()},
          {"volumes", a.volumes.string()},     {"out_dir", a.out_dir.string()},
          {"side", std::to_string(a.side)},    {"target_spacing", a.target_spacing},
          {"augment", b(a.augment)}};
}

KeyValues resolved(const TrainArgs& a) {
  KeyValues kv{{"cache_dir", a.cache_dir.string()}, {"out_dir", a.out_dir.string()}};
  put_model(kv, a.model);
  put_train(kv, a.train);
  return kv;
}

KeyValues resolved(const PseudolabelArgs& a) {
  KeyValues kv{{"cache_dir", a.cache_dir.string()},
               {"manifest", a.manifest.string()},
               {"out_dir", a.out_dir.string()},
               {"threshold", d(a.threshold)},
               {"max_rounds", std::to_string(a.max_rounds)},
               {"min_new", std::to_string(a.min_new)}};
  put_model(kv, a.model);
  put_train(kv, a.train);
  return kv;
}

KeyValues resolved(const EvaluateArgs& a) {
  return {{"checkpoint", a.checkpoint.string()},
          {"cache_dir", a.cache_dir.string()},
          {"split", a.split},
          {"out_dir", a.out_dir.string()},
          {"threshold", d(a.threshold)}};
}

KeyValues resolved(const GradcamArgs& a) {
  return {{"checkpoint", a.checkpoint.string()},
          {"cache_dir", a.cache_dir.string()},
          {"split", a.split},
          {"out_dir", a.out_dir.string()},
          {"limit", std::to_string(a.limit)}};
}

KeyValues resolved(const PhantomArgs& a) {
  return {{"out_dir", a.out_dir.string()},
          {"benign", std::to_string(a.benign)},
          {"malignant", std::to_string(a.malignant)},
          {"ambiguous", std::to_string(a.ambiguous)},
          {"side", std::to_string(a.side)},
          {"seed", std::to_string(a.seed)}};
}

void cmd_label(const LabelArgs& a, std::ostream& out) {
  echo(resolved(a), out);
  require_file(a.ratings);
  const auto records = read_ratings(a.ratings);
  std::vector<LabeledNodule> nodules;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : records) {
    const auto label = consensus_label(r.ratings);
    ++counts[static_cast<int>(label)];
    nodules.push_back({r.nodule_id, label});
  }
  const auto split = make_split(nodules, a.seed);
  if (a.out_manifest.has_parent_path()) fs::create_directories(a.out_manifest.parent_path());
  write_manifest(a.out_manifest, to_manifest(split, nodules));
  out << "benign " << counts[0] << "\nmalignant " << counts[1] << "\nambiguous " << counts[2] << "\n"
      << "train " << split.train_ids.size() << "\nval " << split.val_ids.size() << "\ntest "
      << split.test_ids.size() << "\nunlabeled " << split.unlabeled_ids.size() << "\n";
}

void cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
  echo(resolved(a), out, a.out_dir);
  if (a.side < 1) throw ConfigError("side must be positive");
  std::optional<Vec3> spacing;
  if (a.target_spacing != "none") {
    const auto parts = text::split(a.target_spacing, ',');
    if (parts.size() != 3) throw ConfigError("target_spacing must be 'sx,sy,sz' or 'none'");
    Vec3 s{};
    for (int i = 0; i < 3; ++i) {
      s[i] = text::parse_double(parts[i], "target_spacing");
      if (!(s[i] > 0.0)) throw ConfigError("target_spacing components must be positive");
    }
    spacing = s;
  }
  require_file(a.ratings);
  require_file(a.manifest);
  const auto records = read_ratings(a.ratings);
  std::map<std::string, const NoduleRecord*> by_id;
  for (const auto& r : records) by_id[r.nodule_id] = &r;
  const auto manifest = read_manifest(a.manifest);

  std::map<std::string, NormalizedVolume> volumes;
  std::map<SplitRole, std::vector<Patch>> patches;
  for (const auto& e : manifest) {
    const auto it = by_id.find(e.nodule_id);
    if (it == by_id.end()) throw ValidationError("manifest nodule " + e.nodule_id + " is missing from the ratings");
    const auto& rec = *it->second;
    auto vit = volumes.find(rec.series_id);
    if (vit == volumes.end()) {
      const auto path = a.volumes / (rec.series_id + ".mhd");
      require_file(path);
      auto norm = clip_normalize(read_mhd_volume(path));
      if (spacing) norm = resample_trilinear(norm, *spacing);
      vit = volumes.emplace(rec.series_id, std::move(norm)).first;
    }
    Patch p = extract_patch(vit->second, rec.center_world, static_cast<std::size_t>(a.side), e.nodule_id);
    p.label = e.label;
    auto& dst = patches[e.split];
    if (e.split == SplitRole::Train && a.augment) {
      for (auto& r : rotate_augment(p)) dst.push_back(std::move(r));
    } else {
      dst.push_back(std::move(p));
    }
  }
  for (const auto role : {SplitRole::Train, SplitRole::Val, SplitRole::Test, SplitRole::Unlabeled}) {
    const auto& list = patches[role];
    write_patch_cache(a.out_dir / (to_string(role) + ".patches"), list);
    out << to_string(role) << " " << list.size() << " patches\n";
  }
}

void cmd_train(const TrainArgs& a, std::ostream& out) {
  echo(resolved(a), out, a.out_dir);
  a.train.validate();
  const auto train_set = load_split(a.cache_dir, "train");
  const auto val_set = load_split(a.cache_dir, "val");
  const auto config = make_model_config(a.model, side_of(train_set, "training"));
  LmlccModel<float> model(config, mix_seed(a.train.seed, 1));
  out << "parameters " << model.parameter_count() << "\n";
  const auto result = train(model, train_set, val_set, a.train, [&](const EpochLog& e) {
    out << "epoch " << e.epoch << " lr " << d(e.lr) << " train_loss " << text::format_fixed(e.train_loss, 5)
        << " train_acc " << text::format_fixed(e.train_acc, 4) << " val_loss " << text::format_fixed(e.val_loss, 5)
        << " val_acc " << text::format_fixed(e.val_acc, 4) << "\n";
  });
  diff::write_checkpoint(a.out_dir / "model.ckpt", result.best);
  write_epoch_log(a.out_dir / "epoch_log.csv", result.log);
  out << "best epoch " << result.best_epoch << " val_loss " << text::format_fixed(result.best_val_loss, 5) << "\n";
  if (model.has_window()) out << "cuts " << cuts_line(model.cuts()) << "\n";
}

void cmd_pseudolabel(const PseudolabelArgs& a, std::ostream& out) {
  echo(resolved(a), out, a.out_dir);
  a.train.validate();
  SemisupConfig sc;
  sc.threshold = a.threshold;
  sc.max_rounds = a.max_rounds;
  if (a.min_new < 1) throw ConfigError("min_new must be at least 1");
  sc.min_new = static_cast<std::size_t>(a.min_new);
  sc.validate();
  require_file(a.manifest);
  const auto manifest = read_manifest(a.manifest);
  const auto train_set = load_split(a.cache_dir, "train");
  const auto val_set = load_split(a.cache_dir, "val");
  const auto pool = load_split(a.cache_dir, "unlabeled");
  const auto config = make_model_config(a.model, side_of(train_set, "training"));
  const auto result = semisup_loop(train_set, val_set, pool, config, a.train, sc, [&](const PseudoLabelRound& r) {
    out << "round " << r.round_index << " train_size " << r.train_size << " new " << r.n_newly_labeled
        << " remaining " << r.n_remaining_unlabeled << " mean_confidence "
        << text::format_fixed(r.mean_confidence(), 4) << "\n";
  });
  diff::write_checkpoint(a.out_dir / "model.ckpt", result.final_checkpoint);
  write_round_history(a.out_dir / "rounds.csv", result.rounds);
  write_pseudo_manifest(a.out_dir / "pseudo_manifest.csv", merge_pseudo_labels(manifest, result.pseudo_labels));
  out << "pseudo-labeled " << result.pseudo_labels.size() << " of " << pool.size() << "\n";
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  echo(resolved(a), out, a.out_dir);
  auto model = load_model(a.checkpoint);
  const auto patches = load_split(a.cache_dir, a.split);
  std::vector<int> labels;
  for (const auto& p : patches) {
    if (!p.label) throw ValidationError("patch " + p.nodule_id + " in split '" + a.split + "' has no label");
    labels.push_back(*p.label);
  }
  const auto probs = predict(model, patches);
  auto report = evaluate(labels, probs, a.threshold);
  if (model.has_window()) report.learned_cuts = model.cuts();
  fs::create_directories(a.out_dir);
  write_report(a.out_dir / "report.csv", a.out_dir / "roc.csv", report);
  std::ofstream pred(a.out_dir / "predictions.csv", std::ios::binary | std::ios::trunc);
  if (!pred) throw IoError("cannot write " + (a.out_dir / "predictions.csv").string());
  pred << "nodule_id,augmentation_tag,label,probability\n";
  for (std::size_t i = 0; i < patches.size(); ++i) {
    pred << patches[i].nodule_id << ',' << patches[i].augmentation_tag << ',' << labels[i] << ',' << d(probs[i])
         << "\n";
  }
  out << format_report_text(report);
}

void cmd_gradcam(const GradcamArgs& a, std::ostream& out) {
  echo(resolved(a), out, a.out_dir);
  if (a.limit < 0) throw ConfigError("limit must not be negative");
  auto model = load_model(a.checkpoint);
  auto patches = load_split(a.cache_dir, a.split);
  if (a.limit > 0 && patches.size() > static_cast<std::size_t>(a.limit)) patches.resize(static_cast<std::size_t>(a.limit));
  const auto probs = predict(model, patches);
  std::ofstream summary(a.out_dir / "gradcam.csv", std::ios::binary | std::ios::trunc);
  if (!summary) throw IoError("cannot write " + (a.out_dir / "gradcam.csv").string());
  summary << "nodule_id,augmentation_tag,label,probability,heatmap,peak_x,peak_y,peak_z\n";
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    const auto heat = grad_cam(model, p);
    VolumeGeometry g;
    g.dims = {p.side, p.side, p.side};
    const std::string name = p.nodule_id + "_" + p.augmentation_tag + "_gradcam.mhd";
    write_mhd(a.out_dir / name, g, heat, MetaElementType::Float);
    const auto peak = static_cast<std::size_t>(std::max_element(heat.begin(), heat.end()) - heat.begin());
    summary << p.nodule_id << ',' << p.augmentation_tag << ',' << (p.label ? std::to_string(*p.label) : "") << ','
            << d(probs[i]) << ',' << name << ',' << peak % p.side << ',' << (peak / p.side) % p.side << ','
            << peak / (p.side * p.side) << "\n";
  }
  out << "wrote " << patches.size() << " heatmaps to " << a.out_dir.string() << "\n";
}

void cmd_phantom(const PhantomArgs& a, std::ostream& out) {
  echo(resolved(a), out, a.out_dir);
  if (a.benign < 0 || a.malignant < 0 || a.ambiguous < 0) throw ConfigError("phantom counts must be non-negative");
  if (a.side < 4) throw ConfigError("side must be at least 4");
  const auto side = static_cast<std::size_t>(a.side);
  auto ds = generate_dataset(static_cast<std::size_t>(a.benign), static_cast<std::size_t>(a.malignant), side, a.seed);
  if (a.ambiguous > 0) {
    const auto n = static_cast<std::size_t>(a.ambiguous);
    ds = concat_datasets(std::move(ds), generate_dataset(n / 2, n - n / 2, side, mix_seed(a.seed, 0xa3b), true, "phu"));
  }
  write_phantom_dataset(a.out_dir, ds);
  out << "wrote " << ds.cases.size() << " phantoms (" << a.benign << " benign, " << a.malignant << " malignant, "
      << a.ambiguous << " hidden) to " << a.out_dir.string() << "\n";
}

namespace {

void add_model_options(CLI::App* app, ModelArgs& m) {
  app->add_option("--mode", m.mode, "backbone or lmlcc")->check(CLI::IsMember({"backbone", "lmlcc"}));
  app->add_option("--branches", m.branches, "Number of window branches");
  app->add_option("--init", m.init, "Cut initializer")->check(CLI::IsMember({"constant", "random"}));
  app->add_option("--cuts", m.cuts, "Cut mode")->check(CLI::IsMember({"learnable", "fixed"}));
  app->add_option("--include-original", m.include_original, "Feed the unwindowed input as an extra branch");
  app->add_option("--scale", m.scale, "Backbone size")->check(CLI::IsMember({"desk", "full"}));
  app->add_option("--tau", m.tau, "Window edge softness");
}

void add_train_options(CLI::App* app, TrainConfig& t) {
  app->add_option("--epochs", t.epochs);
  app->add_option("--batch-size", t.batch_size);
  app->add_option("--lr", t.lr);
  app->add_option("--lr-floor", t.lr_floor);
  app->add_option("--plateau-factor", t.plateau_factor);
  app->add_option("--plateau-patience", t.plateau_patience);
  app->add_option("--early-stop-patience", t.early_stop_patience);
  app->add_option("--window-lr-scale", t.window_lr_scale);
  app->add_option("--seed", t.seed);
}

const std::vector<std::string> kSeeded = {"label", "train", "pseudolabel", "phantom"};

std::string option_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  // Pull out --config, then splice its entries in front of explicit flags so
  // the explicit ones win.
  std::vector<std::string> args;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < raw_args.size(); ++i) {
    const auto& s = raw_args[i];
    if (s == "--config") {
      if (i + 1 >= raw_args.size()) {
        err << "error: --config needs a file path\n";
        return kUsage;
      }
      config_path = raw_args[++i];
    } else if (s.rfind("--config=", 0) == 0) {
      config_path = s.substr(9);
    } else {
      args.push_back(s);
    }
  }

  CLI::App app{"Lung nodule malignancy classification with learnable HU windows"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  LabelArgs label;
  auto* s_label = app.add_subcommand("label", "Consensus labels and nodule-level split manifest");
  s_label->add_option("--ratings", label.ratings, "Ratings CSV")->required();
  s_label->add_option("--out-manifest", label.out_manifest, "Split manifest to write")->required();
  s_label->add_option("--seed", label.seed);

  PreprocessArgs pre;
  auto* s_pre = app.add_subcommand("preprocess", "Normalize, resample and cut patch caches per split");
  s_pre->add_option("--ratings", pre.ratings)->required();
  s_pre->add_option("--manifest", pre.manifest)->required();
  s_pre->add_option("--volumes", pre.volumes, "Directory of <series_id>.mhd files")->required();
  s_pre->add_option("--out-dir", pre.out_dir)->required();
  s_pre->add_option("--side", pre.side);
  s_pre->add_option("--target-spacing", pre.target_spacing, "sx,sy,sz in mm or 'none'");
  s_pre->add_option("--augment", pre.augment, "Rotate training patches in 45 degree steps");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train a model on cached patches");
  s_train->add_option("--cache-dir", tr.cache_dir)->required();
  s_train->add_option("--out-dir", tr.out_dir)->required();
  add_model_options(s_train, tr.model);
  add_train_options(s_train, tr.train);

  PseudolabelArgs pl;
  auto* s_pl = app.add_subcommand("pseudolabel", "Semi-supervised pseudo-labeling over the unlabeled pool");
  s_pl->add_option("--cache-dir", pl.cache_dir)->required();
  s_pl->add_option("--manifest", pl.manifest)->required();
  s_pl->add_option("--out-dir", pl.out_dir)->required();
  s_pl->add_option("--threshold", pl.threshold);
  s_pl->add_option("--max-rounds", pl.max_rounds);
  s_pl->add_option("--min-new", pl.min_new);
  add_model_options(s_pl, pl.model);
  add_train_options(s_pl, pl.train);

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Confusion counts, metrics, ROC and AUC on a split");
  s_ev->add_option("--checkpoint", ev.checkpoint)->required();
  s_ev->add_option("--cache-dir", ev.cache_dir)->required();
  s_ev->add_option("--split", ev.split)->check(CLI::IsMember({"train", "val", "test"}));
  s_ev->add_option("--out-dir", ev.out_dir)->required();
  s_ev->add_option("--threshold", ev.threshold);

  GradcamArgs gc;
  auto* s_gc = app.add_subcommand("gradcam", "Grad-CAM heatmaps for cached patches");
  s_gc->add_option("--checkpoint", gc.checkpoint)->required();
  s_gc->add_option("--cache-dir", gc.cache_dir)->required();
  s_gc->add_option("--split", gc.split)->check(CLI::IsMember({"train", "val", "test", "unlabeled"}));
  s_gc->add_option("--out-dir", gc.out_dir)->required();
  s_gc->add_option("--limit", gc.limit);

  PhantomArgs ph;
  auto* s_ph = app.add_subcommand("phantom", "Write a synthetic nodule dataset");
  s_ph->add_option("--out-dir", ph.out_dir)->required();
  s_ph->add_option("--benign", ph.benign);
  s_ph->add_option("--malignant", ph.malignant);
  s_ph->add_option("--ambiguous", ph.ambiguous);
  s_ph->add_option("--side", ph.side);
  s_ph->add_option("--seed", ph.seed);

  const auto sub_it = std::find_if(args.begin(), args.end(), [](const std::string& s) { return !s.empty() && s[0] != '-'; });
  CLI::App* sub = sub_it == args.end() ? nullptr : app.get_subcommand_no_throw(*sub_it);
  std::vector<std::string> injected;
  if (config_path) {
    if (!sub) {
      err << "usage error: a subcommand is required with --config\n";
      return kUsage;
    }
    KeyValues kv;
    try {
      if (!fs::exists(*config_path)) throw IoError("file not found: " + *config_path);
      kv = read_key_values_file(*config_path);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kDataError;
    }
    for (const auto& [k, v] : kv) {
      if (!sub->get_option_no_throw(option_name(k))) {
        err << "usage error: unknown configuration key '" << k << "' for " << sub->get_name() << "\n";
        return kUsage;
      }
      injected.push_back(option_name(k));
      injected.push_back(v);
    }
  }
  if (sub && std::find(kSeeded.begin(), kSeeded.end(), sub->get_name()) != kSeeded.end()) {
    const bool has_seed = std::find(args.begin(), args.end(), "--seed") != args.end() ||
                          std::find(injected.begin(), injected.end(), "--seed") != injected.end() ||
                          std::any_of(args.begin(), args.end(), [](const std::string& s) { return s.rfind("--seed=", 0) == 0; });
    if (const char* env = std::getenv("LMLCC_SEED"); env && !has_seed) {
      injected.insert(injected.begin(), {"--seed", env});
    }
  }
  if (sub) args.insert(sub_it + 1, injected.begin(), injected.end());

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (s_label->parsed()) cmd_label(label, out);
    if (s_pre->parsed()) cmd_preprocess(pre, out);
    if (s_train->parsed()) cmd_train(tr, out);
    if (s_pl->parsed()) cmd_pseudolabel(pl, out);
    if (s_ev->parsed()) cmd_evaluate(ev, out);
    if (s_gc->parsed()) cmd_gradcam(gc, out);
    if (s_ph->parsed()) cmd_phantom(ph, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace lmlcc::cli
