// eipr: dataset construction, training, evaluation, alpha sweeps, the
// gradient-descent baseline and figure export from the command line.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eipr/eipr.hpp"

namespace fs = std::filesystem;
using namespace eipr;

namespace {

const std::vector<std::string> kConfigKeys = {"regime",           "alpha",         "lambda",          "learning_rate",
                                              "epochs",           "batch_size",    "dataset_fraction",
                                              "shifts_per_image", "seed",          "optimizer",
                                              "scales",           "base_channels", "mc_normalization"};

// TrainConfig keys exposed as flags of the same name; a --config file is read
// first and flags override it.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value file mirroring the training configuration")
        ->check(CLI::ExistingFile);
    for (const auto& key : kConfigKeys) app->add_option("--" + key, values[key], "override '" + key + "'");
  }

  TrainConfig resolve(CLI::App* app) const {
    TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
    for (const auto& key : kConfigKeys)
      if (app->count("--" + key) > 0) cfg.set(key, values.at(key));
    cfg.validate();
    return cfg;
  }
};

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
  return out;
}

std::vector<Regime> parse_regimes(const std::string& text) {
  std::vector<Regime> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_regime(item));
  return out;
}

void print_stats(const std::string& label, const CellStats& s) {
  std::cout << label << ": mean CS " << s.mean_cs << ", std " << s.std_cs << ", n = " << s.count << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised phase retrieval with translation equivariance"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "libtorch intra-op threads (0 keeps the default)");

  // dataset build
  auto* dataset = app.add_subcommand("dataset", "Dataset cache management");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Measure an IDX image corpus with a seeded Gaussian operator");
  std::string images_path, corpus_name = "mnist", cache_dir = "cache", select = "all";
  int64_t m = 0, train_count = 0, test_count = 0, limit = 0;
  double alpha = 0.0;
  uint64_t op_seed = 0, split_seed = 0;
  bool no_truth = false;
  build->add_option("--images", images_path, "IDX image file (optionally .gz)")->required()->check(CLI::ExistingFile);
  build->add_option("--corpus", corpus_name, "Corpus name used in the cache path");
  build->add_option("--m", m, "Number of measurements");
  build->add_option("--alpha", alpha, "Sampling ratio m/n (used when --m is absent)");
  build->add_option("--seed", op_seed, "Operator seed")->required();
  build->add_option("--cache-dir", cache_dir, "Cache root");
  build->add_option("--select", select, "all | train | test")->check(CLI::IsMember({"all", "train", "test"}));
  build->add_option("--train-count", train_count, "Train split size for --select");
  build->add_option("--test-count", test_count, "Test split size for --select");
  build->add_option("--split-seed", split_seed, "Seed of the train/test split");
  build->add_option("--limit", limit, "Keep only the first N selected images");
  build->add_flag("--no-truth", no_truth, "Drop ground-truth images from the archive");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a reconstructor on a dataset archive");
  ConfigFlags train_flags;
  train_flags.attach(train_cmd);
  std::string train_dataset, train_out = "run";
  train_cmd->add_option("--dataset", train_dataset, "Dataset archive")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "Run directory (checkpoints, log, resolved config)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Cosine similarity of a checkpoint on a test archive");
  std::string eval_ckpt, eval_dataset, eval_report, eval_regime;
  int64_t eval_keep = 8;
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--dataset", eval_dataset, "Test archive with truths")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--report", eval_report, "Write an EvalReport JSON here");
  eval_cmd->add_option("--regime", eval_regime, "Label for the report cell (defaults to the checkpoint's regime)");
  eval_cmd->add_option("--keep-images", eval_keep, "Phase-aligned reconstructions stored for grids");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate every (alpha, regime) cell");
  ConfigFlags sweep_flags;
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->get_option("--seed")->required();
  std::string sweep_images, sweep_state = "sweep", sweep_report, sweep_alphas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
                            sweep_regimes = "ss_amplitude,ss_intensity,supervised";
  int64_t sweep_train = 0, sweep_test = 1000, sweep_keep = 8;
  sweep_cmd->add_option("--images", sweep_images, "IDX image file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--train-count", sweep_train, "Train split size (default: all images not in the test split)");
  sweep_cmd->add_option("--test-count", sweep_test, "Test split size");
  sweep_cmd->add_option("--alphas", sweep_alphas, "Comma-separated sampling ratios");
  sweep_cmd->add_option("--regimes", sweep_regimes, "Comma-separated regimes");
  sweep_cmd->add_option("--state-dir", sweep_state, "Resumable run state directory");
  sweep_cmd->add_option("--report", sweep_report, "EvalReport JSON (default: <state-dir>/report.json)");
  sweep_cmd->add_option("--keep-images", sweep_keep, "Reconstructions stored per cell");

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "Gradient-descent reconstruction of a test archive");
  std::string base_dataset, base_report, base_init = "backprojection", base_objective = "amplitude";
  GdConfig gd;
  int64_t base_count = 100, base_keep = 8;
  baseline_cmd->add_option("--dataset", base_dataset, "Test archive with truths")->required()->check(CLI::ExistingFile);
  baseline_cmd->add_option("--report", base_report, "Write an EvalReport JSON here");
  baseline_cmd->add_option("--count", base_count, "Number of test images to solve (0 = all)");
  baseline_cmd->add_option("--steps", gd.steps);
  baseline_cmd->add_option("--step-size", gd.step_size);
  baseline_cmd->add_option("--restarts", gd.restarts);
  baseline_cmd->add_option("--gd-seed", gd.seed);
  baseline_cmd->add_option("--init", base_init)->check(CLI::IsMember({"backprojection", "random"}));
  baseline_cmd->add_option("--objective", base_objective)->check(CLI::IsMember({"amplitude", "intensity"}));
  baseline_cmd->add_option("--keep-images", base_keep);

  // export
  auto* export_cmd = app.add_subcommand("export", "CSV, CS-vs-alpha plot and reconstruction grids");
  std::vector<std::string> export_reports;
  std::string export_out = "figures";
  export_cmd->add_option("--report", export_reports, "EvalReport JSON (repeatable; merged)")
      ->required()
      ->check(CLI::ExistingFile);
  export_cmd->add_option("--out", export_out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) torch::set_num_threads(threads);

  try {
    if (build->parsed()) {
      auto images = load_idx_images(images_path);
      if (select != "all") {
        if (train_count < 1 || test_count < 1)
          throw std::invalid_argument("--select train|test needs --train-count and --test-count");
        auto corpus = split_corpus(images, train_count, test_count, split_seed, corpus_name);
        images = select == "train" ? corpus.train_images : corpus.test_images;
      }
      if (limit > 0 && limit < images.size(0)) images = images.narrow(0, 0, limit);
      const ImageShape shape{images.size(1), images.size(2)};
      if (m <= 0) {
        if (!(alpha > 0.0)) throw std::invalid_argument("give --m or --alpha");
        m = measurements_for(alpha, shape.numel());
      }
      const auto op = make_operator(m, shape, op_seed);
      const std::string corpus = select == "all" ? corpus_name : corpus_name + "-" + select;
      const DatasetArchive archive{corpus, op, make_dataset(images, op, !no_truth)};
      const auto path = archive_path(cache_dir, corpus, m, shape.numel(), op_seed);
      save_dataset(archive, path);
      std::cout << path << ": " << archive.batch.size() << " measurement vectors, m = " << m
                << ", alpha = " << op.alpha() << '\n';
    } else if (train_cmd->parsed()) {
      auto cfg = train_flags.resolve(train_cmd);
      auto archive = load_dataset(train_dataset);
      cfg.alpha = archive.op.alpha();
      auto data = archive.batch;
      if (cfg.dataset_fraction < 1.0) {
        auto keep = select_fraction(data.size(), cfg.dataset_fraction, cfg.seed);
        data = data.select(torch::tensor(keep, torch::kLong));
      }
      fs::create_directories(train_out);
      std::ofstream(fs::path(train_out) / "config.ini") << cfg.to_key_value_text();
      TrainOptions options;
      options.log_path = (fs::path(train_out) / "train.log").string();
      options.checkpoint_dir = train_out;
      options.on_epoch = [](int64_t epoch, double loss) {
        std::cout << "epoch " << epoch << " mean loss " << loss << std::endl;
      };
      auto ckpt = train(cfg, data, archive.op, options);
      const auto path = (fs::path(train_out) / "model.ckpt").string();
      save_checkpoint(ckpt, path);
      std::cout << "wrote " << path << " (manifest " << ckpt.manifest_digest << ")\n";
    } else if (eval_cmd->parsed()) {
      auto ckpt = load_checkpoint(eval_ckpt);
      auto archive = load_dataset(eval_dataset);
      EvalOptions options;
      options.keep_images = eval_keep;
      options.regime = eval_regime.empty() ? to_string(parse_train_config(ckpt.manifest).regime) : eval_regime;
      auto result = evaluate(ckpt, archive.batch, archive.op, options);
      print_stats(options.regime + " @ alpha " + std::to_string(archive.op.alpha()), result.stats);
      if (!eval_report.empty()) {
        EvalReport report;
        report.per_alpha[archive.op.alpha()][options.regime] = result.stats;
        report.per_image = result.images;
        save_report(report, eval_report);
      }
    } else if (sweep_cmd->parsed()) {
      SweepConfig cfg;
      cfg.base = sweep_flags.resolve(sweep_cmd);
      cfg.alphas = parse_alphas(sweep_alphas);
      cfg.regimes = parse_regimes(sweep_regimes);
      cfg.state_dir = sweep_state;
      cfg.keep_images = sweep_keep;
      cfg.progress = [](const std::string& msg) { std::cout << msg << std::endl; };
      auto images = load_idx_images(sweep_images);
      if (sweep_train <= 0) sweep_train = images.size(0) - sweep_test;
      auto corpus = split_corpus(images, sweep_train, sweep_test, cfg.base.seed, fs::path(sweep_images).filename());
      auto report = sweep_alpha(cfg, corpus);
      const auto path = sweep_report.empty() ? (fs::path(sweep_state) / "report.json").string() : sweep_report;
      save_report(report, path);
      for (const auto& [a, row] : report.per_alpha)
        for (const auto& [regime, stats] : row) print_stats(regime + " @ alpha " + std::to_string(a), stats);
      for (const auto& f : report.failures)
        std::cerr << "cell " << f.regime << " @ alpha " << f.alpha << " failed: " << f.message << '\n';
      std::cout << "wrote " << path << '\n';
      return report.failures.empty() ? 0 : 2;
    } else if (baseline_cmd->parsed()) {
      gd.init = base_init == "random" ? GdInit::Random : GdInit::Backprojection;
      gd.objective = base_objective == "intensity" ? McVariant::Intensity : McVariant::Amplitude;
      auto archive = load_dataset(base_dataset);
      auto test = archive.batch;
      if (base_count > 0 && base_count < test.size())
        test = test.select(torch::arange(base_count, torch::kLong));
      EvalOptions options;
      options.keep_images = base_keep;
      options.alpha_key = archive.op.alpha();
      options.regime = "gd";
      const auto& op = archive.op;
      auto result = evaluate([&](const torch::Tensor& y) { return solve_batch(y, op, gd); }, test, options);
      print_stats("gd @ alpha " + std::to_string(op.alpha()), result.stats);
      if (!base_report.empty()) {
        EvalReport report;
        report.per_alpha[op.alpha()]["gd"] = result.stats;
        report.per_image = result.images;
        save_report(report, base_report);
      }
    } else if (export_cmd->parsed()) {
      EvalReport merged;
      for (const auto& path : export_reports) merged.merge(load_report(path));
      auto files = export_report(merged, export_out);
      std::cout << files.csv << '\n' << files.plot << '\n';
      for (const auto& g : files.grids) std::cout << g << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
