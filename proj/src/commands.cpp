#include "acan/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

#include "acan/checkpoint.hpp"
#include "acan/data_io.hpp"
#include "acan/errors.hpp"
#include "acan/persistence.hpp"
#include "acan/synthetic.hpp"
#include "acan/training_log.hpp"

namespace acan {

namespace {

std::string numbered(int64_t i, const char* suffix = ".png") {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05lld%s", static_cast<long long>(i), suffix);
  return buf;
}

void write_domain(const fs::path& dir, const std::vector<torch::Tensor>& images) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) write_png(dir / numbered(static_cast<int64_t>(i)), images[i]);
}

nlohmann::json epoch_json(const EpochRecord& rec, const AttributeSchema& schema) {
  nlohmann::json terms = nlohmann::json::object();
  for (std::size_t i = 0; i < rec.terms.size(); ++i) terms[schema.at(i).name] = rec.terms[i];
  return {{"kind", "epoch"}, {"epoch", rec.epoch}, {"loss", rec.loss}, {"terms", terms}};
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      const auto listed = list_images(p);
      files.insert(files.end(), listed.begin(), listed.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) throw DataError("no input images");
  return files;
}

bool parse_translation_direction(const std::string& direction) {
  if (direction == "ab") return true;
  if (direction == "ba") return false;
  throw UsageError("unknown direction '" + direction + "' (expected ab or ba)");
}

std::vector<fs::path> head(const std::vector<fs::path>& paths, int64_t n) {
  const auto k = std::min<std::size_t>(paths.size(), static_cast<std::size_t>(n));
  return {paths.begin(), paths.begin() + static_cast<std::ptrdiff_t>(k)};
}

torch::Tensor select_batch(const torch::Tensor& images, const std::vector<int64_t>& order, int64_t step,
                           int64_t batch_size) {
  const auto n = static_cast<int64_t>(order.size());
  std::vector<int64_t> idx;
  for (int64_t j = 0; j < batch_size; ++j) idx.push_back(order[static_cast<std::size_t>((step * batch_size + j) % n)]);
  return images.index_select(0, torch::tensor(idx, torch::kInt64));
}

}  // namespace

void cmd_make_synthetic(const MakeSyntheticOptions& options) {
  if (options.count < 0) throw ConfigError("count must be non-negative");
  if (options.out_dir.empty()) throw ConfigError("output directory is required");
  fs::create_directories(options.out_dir);
  if (options.unpaired) {
    if (options.count == 0 || options.test_count <= 0) {
      throw ConfigError("unpaired domains need at least one training and one test image");
    }
    const auto test_seed = derive_seed(options.seed, 1);
    write_domain(options.out_dir / "trainA", synth::generate_domain('A', options.count, options.seed, options.canvas));
    write_domain(options.out_dir / "trainB", synth::generate_domain('B', options.count, options.seed, options.canvas));
    write_domain(options.out_dir / "testA", synth::generate_domain('A', options.test_count, test_seed, options.canvas));
    write_domain(options.out_dir / "testB", synth::generate_domain('B', options.test_count, test_seed, options.canvas));
    return;
  }
  const auto corpus = synth::generate_corpus(options.count, options.seed, options.canvas);
  LabeledDataset ds;
  ds.root = options.out_dir;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto name = numbered(static_cast<int64_t>(i));
    write_png(options.out_dir / name, corpus[i].image);
    ds.items.push_back({name, corpus[i].label});
  }
  write_label_file(options.out_dir / kLabelFile, ds);
}

std::vector<EpochRecord> cmd_train_acan(const RunConfig& config, const TrainAcanOptions& options) {
  config.validate();
  if (config.dataset.empty()) throw ConfigError("train-acan needs a label file (dataset)");
  if (options.stop_after < 0) throw ConfigError("stop_after must be non-negative");
  const fs::path out = config.output_dir;
  const auto ckpt_path = out / kAcanCheckpoint;

  std::optional<AcanTrainer> trainer;
  if (options.resume) {
    if (!fs::exists(ckpt_path)) throw ConfigError("nothing to resume: " + ckpt_path.string() + " not found");
    const auto ck = Checkpoint::load(ckpt_path.string());
    if (!ck.meta.contains("run_config") || !(RunConfig::from_json(ck.meta["run_config"]) == config)) {
      throw ConfigError("resume requires the configuration the checkpoint was trained with");
    }
    trainer.emplace(restore_acan_trainer(ck));
  }

  const auto dataset = parse_label_file(config.dataset);
  if (dataset.items.empty()) throw DataError("label file " + config.dataset + " lists no images");
  const auto data = load_labeled_images(dataset, config.image_size);
  if (!trainer) {
    trainer.emplace(AcanModel(config.backbone(), AttributeSchema::canonical(), config.seed),
                    config.acan_training());
  }

  fs::create_directories(out);
  config.save((out / kConfigFile).string());
  TrainingLog log(out / kAcanLog, options.resume);
  std::vector<EpochRecord> records;
  const auto& schema = trainer->model().schema();
  while (trainer->epochs_done() < config.epochs &&
         (options.stop_after == 0 || trainer->epochs_done() < options.stop_after)) {
    records.push_back(trainer->run_epoch(data));
    log.write(epoch_json(records.back(), schema));
    Checkpoint ck;
    ck.meta["run_config"] = config.to_json();
    store_acan_trainer(ck, *trainer);
    ck.save(ckpt_path.string());
  }
  return records;
}

AcanMetrics cmd_eval_acan(const fs::path& checkpoint, const fs::path& label_file) {
  if (!fs::exists(checkpoint)) throw ConfigError("checkpoint " + checkpoint.string() + " not found");
  const auto model = restore_acan(Checkpoint::load(checkpoint.string()));
  const auto dataset = parse_label_file(label_file, model.schema());
  if (dataset.items.empty()) throw DataError("label file " + label_file.string() + " lists no images");
  return evaluate_acan(model, load_labeled_images(dataset, model.config().input_size()));
}

nlohmann::json probe_measurements(const torch::Tensor& images, const AcanModel& acan) {
  nlohmann::json j;
  std::vector<double> contrast, variety;
  std::vector<int64_t> primary, harmony;
  for (int64_t i = 0; i < images.size(0); ++i) {
    contrast.push_back(synth::measure_contrast(images[i]));
    variety.push_back(synth::measure_color_variety(images[i]));
    primary.push_back(synth::measure_primary_color(images[i]));
    harmony.push_back(synth::measure_harmony(images[i]));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  j["contrast"] = contrast;
  j["color_variety"] = variety;
  j["primary_color"] = primary;
  j["color_harmony"] = harmony;
  j["mean_contrast"] = mean(contrast);
  j["mean_color_variety"] = mean(variety);

  torch::NoGradGuard no_grad;
  const auto pred = acan.predict(ImageBatch(images, ImageRange::kAcan));
  const auto& schema = acan.schema();
  nlohmann::json predicted;
  for (std::size_t s = 0; s < AttributeSchema::kScalarCount; ++s) {
    std::vector<double> ratings;
    for (int64_t i = 0; i < pred.batch_size(); ++i) ratings.push_back(pred.rating(i, s));
    predicted[schema.at(s).name] = mean(ratings);
  }
  for (std::size_t k = 0; k < AttributeSchema::kCategoricalCount; ++k) {
    std::vector<int64_t> classes;
    for (int64_t i = 0; i < pred.batch_size(); ++i) classes.push_back(pred.predicted_class(i, k));
    predicted[schema.at(schema.categorical_attribute(k)).name] = classes;
  }
  j["acan"] = predicted;
  return j;
}

torch::Tensor triple_grid(const torch::Tensor& original, const torch::Tensor& translated,
                          const torch::Tensor& reconstructed) {
  if (!original.sizes().equals(translated.sizes()) || !original.sizes().equals(reconstructed.sizes()) ||
      original.dim() != 4) {
    throw InputError("grid columns must be equally shaped N x 3 x H x W batches");
  }
  const auto n = original.size(0), h = original.size(2), w = original.size(3);
  auto rows = torch::cat({original, translated, reconstructed}, 3);  // N x 3 x H x 3W
  return rows.permute({1, 0, 2, 3}).reshape({3, n * h, 3 * w}).contiguous();
}

void cmd_train_gan(const RunConfig& config) {
  config.validate();
  if (config.acan_checkpoint.empty() || !fs::exists(config.acan_checkpoint)) {
    throw ConfigError("attribute network checkpoint '" + config.acan_checkpoint + "' not found");
  }
  if (config.dataset.empty()) throw ConfigError("train-gan needs an unpaired dataset root (dataset)");
  auto acan = restore_acan(Checkpoint::load(config.acan_checkpoint));
  acan.freeze();
  if (acan.config().input_size() != config.image_size) {
    throw ConfigError("image_size " + std::to_string(config.image_size) +
                      " differs from the attribute network input size " +
                      std::to_string(acan.config().input_size()));
  }
  AttributeTarget target(acan.schema());
  if (!config.target_path.empty()) target = AttributeTarget::load(config.target_path, acan.schema());
  for (const auto& [name, w] : config.attribute_weights) target.set_weight(name, w);
  const auto weights = target.weights();
  const bool guided = std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; });

  const auto domains = load_unpaired(config.dataset);
  const auto images_a = load_images(domains.train_a, config.image_size, ImageRange::kGenerator).tensor();
  const auto images_b = load_images(domains.train_b, config.image_size, ImageRange::kGenerator).tensor();
  const auto probe_a = load_images(head(domains.test_a.empty() ? domains.train_a : domains.test_a, config.probe_size),
                                   config.image_size, ImageRange::kGenerator);
  const auto probe_b = load_images(head(domains.test_b.empty() ? domains.train_b : domains.test_b, config.probe_size),
                                   config.image_size, ImageRange::kGenerator);

  CycleGanTrainer trainer(config.gan_training());
  AttributeGuidance guidance{&acan, target, guidance_direction_from_string(config.direction)};

  const fs::path out = config.output_dir;
  fs::create_directories(out / "grids");
  config.save((out / kConfigFile).string());
  TrainingLog log(out / kGanLog, false);
  log.write({{"kind", "probe"},
             {"a", probe_measurements(to_acan_range(probe_a.tensor()), acan)},
             {"b", probe_measurements(to_acan_range(probe_b.tensor()), acan)}});

  const int64_t n_a = images_a.size(0), n_b = images_b.size(0);
  const int64_t steps_per_epoch = (std::max(n_a, n_b) + config.batch_size - 1) / config.batch_size;
  int64_t step = 0;
  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order_a = epoch_order(n_a, derive_seed(config.seed, 0xA), epoch);
    const auto order_b = epoch_order(n_b, derive_seed(config.seed, 0xB), epoch);
    for (int64_t k = 0; k < steps_per_epoch; ++k) {
      const ImageBatch a(select_batch(images_a, order_a, k, config.batch_size), ImageRange::kGenerator);
      const ImageBatch b(select_batch(images_b, order_b, k, config.batch_size), ImageRange::kGenerator);
      const auto losses = guided ? guided_training_step(trainer, a, b, guidance) : trainer.step(a, b);
      auto rec = losses.to_json(acan.schema());
      rec["kind"] = "step";
      rec["step"] = ++step;
      rec["epoch"] = epoch + 1;
      log.write(std::move(rec));
    }

    const auto fake_b = trainer.translate(probe_a, true);
    const auto rec_a = trainer.translate(fake_b, false);
    const auto fake_a = trainer.translate(probe_b, false);
    const auto rec_b = trainer.translate(fake_a, true);
    log.write({{"kind", "epoch"},
               {"epoch", epoch + 1},
               {"probe_ab", probe_measurements(to_acan_range(fake_b.tensor()), acan)},
               {"probe_ba", probe_measurements(to_acan_range(fake_a.tensor()), acan)}});
    if ((epoch + 1) % config.grid_every == 0 || epoch + 1 == config.epochs) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04lld", static_cast<long long>(epoch + 1));
      write_png(out / "grids" / (std::string(name) + "_ab.png"),
                triple_grid(to_acan_range(probe_a.tensor()), to_acan_range(fake_b.tensor()),
                            to_acan_range(rec_a.tensor())));
      write_png(out / "grids" / (std::string(name) + "_ba.png"),
                triple_grid(to_acan_range(probe_b.tensor()), to_acan_range(fake_a.tensor()),
                            to_acan_range(rec_b.tensor())));
    }
  }

  Checkpoint ck;
  ck.meta["run_config"] = config.to_json();
  ck.meta["target"] = target.to_json();
  trainer.store(ck);
  ck.save((out / kGanCheckpoint).string());
}

namespace {

std::pair<CycleGanTrainer, ImageBatch> load_for_translation(const fs::path& checkpoint,
                                                            const std::vector<fs::path>& inputs) {
  if (!fs::exists(checkpoint)) throw ConfigError("checkpoint " + checkpoint.string() + " not found");
  auto trainer = CycleGanTrainer::restore(Checkpoint::load(checkpoint.string()));
  auto images = load_images(inputs, trainer.config().net.image_size, ImageRange::kGenerator);
  return {std::move(trainer), std::move(images)};
}

}  // namespace

std::vector<fs::path> cmd_translate(const fs::path& checkpoint, const std::vector<fs::path>& inputs,
                                    const std::string& direction, const fs::path& out_dir) {
  const bool a_to_b = parse_translation_direction(direction);
  const auto files = expand_inputs(inputs);
  auto [trainer, images] = load_for_translation(checkpoint, files);
  const auto out = to_acan_range(trainer.translate(images, a_to_b).tensor());
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < files.size(); ++i) {
    written.push_back(out_dir / (files[i].stem().string() + ".png"));
    write_png(written.back(), out[static_cast<int64_t>(i)]);
  }
  return written;
}

void cmd_grid(const fs::path& checkpoint, const std::vector<fs::path>& inputs, const std::string& direction,
              const fs::path& out_file) {
  const bool a_to_b = parse_translation_direction(direction);
  const auto files = expand_inputs(inputs);
  auto [trainer, images] = load_for_translation(checkpoint, files);
  const auto translated = trainer.translate(images, a_to_b);
  const auto reconstructed = trainer.translate(translated, !a_to_b);
  write_png(out_file, triple_grid(to_acan_range(images.tensor()), to_acan_range(translated.tensor()),
                                  to_acan_range(reconstructed.tensor())));
}

}  // namespace acan
