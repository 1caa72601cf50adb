#include "eipr/sweep.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "binary_io.hpp"
#include "eipr/errors.hpp"
#include "eipr/sensing.hpp"
#include "eipr/training.hpp"
#include "json.hpp"

namespace eipr {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string cell_key(double alpha, Regime regime) {
  std::ostringstream s;
  s << "a" << std::llround(alpha * 1e6) << "_" << to_string(regime);
  return s.str();
}

std::string sweep_digest(const SweepConfig& cfg, const Corpus& corpus) {
  std::ostringstream s;
  s << cfg.base.manifest() << "corpus=" << corpus.name << "\ntrain=" << corpus.train_images.size(0)
    << "\ntest=" << corpus.test_images.size(0) << "\nkeep=" << cfg.keep_images << "\nalphas=";
  for (double a : cfg.alphas) s << a << ';';
  s << "\nregimes=";
  for (auto r : cfg.regimes) s << to_string(r) << ';';
  return fnv1a_hex(s.str());
}

json image_to_json(const torch::Tensor& t) {
  auto c = t.to(torch::kComplexDouble).contiguous();
  auto re = torch::real(c).contiguous();
  auto im = torch::imag(c).contiguous();
  return {{"h", c.size(0)},
          {"w", c.size(1)},
          {"re", std::vector<double>(re.data_ptr<double>(), re.data_ptr<double>() + re.numel())},
          {"im", std::vector<double>(im.data_ptr<double>(), im.data_ptr<double>() + im.numel())}};
}

torch::Tensor image_from_json(const json& j) {
  const int64_t h = j.at("h");
  const int64_t w = j.at("w");
  auto re = torch::tensor(j.at("re").get<std::vector<double>>(), torch::kDouble).reshape({h, w});
  auto im = torch::tensor(j.at("im").get<std::vector<double>>(), torch::kDouble).reshape({h, w});
  return torch::complex(re, im);
}

class RunState {
 public:
  RunState(std::string dir, std::string digest) : dir_(std::move(dir)), digest_(std::move(digest)) {
    state_ = {{"sweep_digest", digest_}, {"cells", json::object()}};
    if (dir_.empty()) return;
    const auto path = file();
    if (!fs::exists(path)) return;
    json loaded;
    try {
      loaded = json::parse(detail::read_text(path));
    } catch (const json::exception& e) {
      throw IoError("corrupt sweep state '" + path + "': " + e.what());
    }
    if (loaded.value("sweep_digest", std::string{}) != digest_)
      throw std::invalid_argument("sweep state in '" + dir_ + "' belongs to a different sweep configuration");
    state_ = std::move(loaded);
  }

  const json* done(const std::string& key) const {
    const auto& cells = state_.at("cells");
    auto it = cells.find(key);
    if (it == cells.end() || it->value("status", std::string{}) != "done") return nullptr;
    return &*it;
  }

  void record(const std::string& key, json cell) {
    state_["cells"][key] = std::move(cell);
    if (!dir_.empty()) detail::atomic_write_text(file(), state_.dump());
  }

  std::string cell_dir(const std::string& key) const { return (fs::path(dir_) / "cells" / key).string(); }

 private:
  std::string file() const { return (fs::path(dir_) / "sweep_state.json").string(); }

  std::string dir_;
  std::string digest_;
  json state_;
};

}  // namespace

int64_t measurements_for(double alpha, int64_t n) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  return std::max<int64_t>(1, std::llround(alpha * static_cast<double>(n)));
}

uint64_t derive_operator_seed(uint64_t base_seed, double alpha) {
  return mix_seed(base_seed, static_cast<uint64_t>(std::llround(alpha * 1e6)));
}

Corpus split_corpus(const torch::Tensor& images, int64_t train_count, int64_t test_count, uint64_t seed,
                    std::string name) {
  if (images.dim() != 3) throw ShapeError("split_corpus expects [N, H, W] images");
  if (train_count < 1 || test_count < 1 || train_count + test_count > images.size(0))
    throw std::invalid_argument("split_corpus: need 1 <= train, 1 <= test, train + test <= " +
                                std::to_string(images.size(0)));
  std::vector<int64_t> order(static_cast<size_t>(images.size(0)));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x5eed));
  std::shuffle(order.begin(), order.end(), rng);
  auto pick = [&](int64_t from, int64_t count) {
    return images.index_select(
        0, torch::tensor(std::vector<int64_t>(order.begin() + from, order.begin() + from + count), torch::kLong));
  };
  return {std::move(name), pick(0, train_count), pick(train_count, test_count)};
}

EvalReport sweep_alpha(const SweepConfig& config, const Corpus& corpus) {
  if (config.alphas.empty() || config.regimes.empty())
    throw std::invalid_argument("sweep_alpha: alphas and regimes must be non-empty");
  if (!corpus.train_images.defined() || !corpus.test_images.defined() || corpus.train_images.dim() != 3 ||
      corpus.test_images.dim() != 3 || corpus.train_images.size(0) == 0 || corpus.test_images.size(0) == 0)
    throw std::invalid_argument("sweep_alpha: corpus needs non-empty [N, H, W] train and test images");
  config.base.validate();
  const ImageShape shape{corpus.train_images.size(1), corpus.train_images.size(2)};
  auto say = [&](const std::string& msg) {
    if (config.progress) config.progress(msg);
  };

  RunState state(config.state_dir, sweep_digest(config, corpus));
  const auto subset = select_fraction(corpus.train_images.size(0), config.base.dataset_fraction, config.base.seed);
  const auto train_images = corpus.train_images.index_select(0, torch::tensor(subset, torch::kLong));

  EvalReport report;
  for (const double alpha : config.alphas) {
    const auto m = measurements_for(alpha, shape.numel());
    std::optional<SensingOperator> op;
    std::optional<MeasurementBatch> train_data;
    std::optional<MeasurementBatch> test_data;

    for (const auto regime : config.regimes) {
      const auto key = cell_key(alpha, regime);
      const auto name = to_string(regime);
      if (const auto* cell = state.done(key)) {
        say("reuse " + key);
        report.per_alpha[alpha][name] = {cell->at("mean_cs"), cell->at("std_cs"), cell->at("n")};
        for (const auto& img : cell->at("images"))
          report.per_image.push_back({alpha, name, img.at("index"), img.at("cs"), image_from_json(img.at("truth")),
                                      image_from_json(img.at("aligned"))});
        continue;
      }
      try {
        if (!op) {
          op = make_operator(m, shape, derive_operator_seed(config.base.seed, alpha));
          train_data = make_dataset(train_images, *op, true);
          test_data = make_dataset(corpus.test_images, *op, true);
        }
        TrainConfig cell_cfg = config.base;
        cell_cfg.alpha = alpha;
        cell_cfg.regime = regime;

        TrainOptions train_options;
        if (!config.state_dir.empty()) {
          const auto dir = state.cell_dir(key);
          fs::create_directories(dir);
          train_options.log_path = (fs::path(dir) / "train.log").string();
          fs::remove(train_options.log_path);
        }
        train_options.on_epoch = [&](int64_t epoch, double loss) {
          say(key + " epoch " + std::to_string(epoch) + " mean loss " + std::to_string(loss));
        };
        say("train " + key + " (m=" + std::to_string(m) + ")");
        const auto ckpt = train(cell_cfg, *train_data, *op, train_options);
        if (!config.state_dir.empty())
          save_checkpoint(ckpt, (fs::path(state.cell_dir(key)) / "model.ckpt").string());

        EvalOptions eval_options;
        eval_options.keep_images = config.keep_images;
        eval_options.alpha_key = alpha;
        eval_options.regime = name;
        const auto result = evaluate(ckpt, *test_data, *op, eval_options);

        json cell = {{"status", "done"},
                     {"alpha", alpha},
                     {"regime", name},
                     {"m", m},
                     {"mean_cs", result.stats.mean_cs},
                     {"std_cs", result.stats.std_cs},
                     {"n", result.stats.count},
                     {"checkpoint_digest", ckpt.manifest_digest},
                     {"images", json::array()}};
        for (const auto& img : result.images)
          cell["images"].push_back({{"index", img.index},
                                    {"cs", img.cs},
                                    {"truth", image_to_json(img.truth)},
                                    {"aligned", image_to_json(img.aligned)}});
        state.record(key, std::move(cell));
        report.per_alpha[alpha][name] = result.stats;
        report.per_image.insert(report.per_image.end(), result.images.begin(), result.images.end());
        say("done " + key + " mean CS " + std::to_string(result.stats.mean_cs));
      } catch (const std::exception& e) {
        say("failed " + key + ": " + e.what());
        state.record(key, {{"status", "failed"}, {"alpha", alpha}, {"regime", name}, {"message", e.what()}});
        report.failures.push_back({alpha, name, e.what()});
      }
    }
  }
  return report;
}

}  // namespace eipr
