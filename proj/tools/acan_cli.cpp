// Command-line driver: synthetic corpora, attribute network training and evaluation,
// attribute-guided translation training, translation and result grids.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "acan/commands.hpp"
#include "acan/errors.hpp"
#include "acan/run_config.hpp"

namespace {

// Every RunConfig key becomes a --key flag; given flags override the config file.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    const auto defaults = acan::RunConfig{}.to_json();
    for (const auto& [key, value] : defaults.items()) {
      options[key] = cmd->add_option("--" + key, values[key], "overrides '" + key + "' (default " + value.dump() + ")");
    }
  }

  acan::RunConfig resolve() const {
    std::map<std::string, std::string> given;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) given[key] = values.at(key);
    }
    return acan::resolve_run_config(config_path.empty() ? std::nullopt : std::optional(config_path), given);
  }
};

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  CLI::App app{"Attribute-guided unpaired image translation"};
  app.require_subcommand(1);

  acan::MakeSyntheticOptions synth;
  auto* make = app.add_subcommand("make-synthetic", "render a labelled synthetic corpus or unpaired domains");
  make->add_option("--count", synth.count, "number of images (per domain when --unpaired)");
  make->add_option("--seed", synth.seed, "generator seed");
  std::string synth_out;
  make->add_option("--out", synth_out, "output directory")->required();
  make->add_option("--canvas", synth.canvas, "image side in pixels");
  make->add_flag("--unpaired", synth.unpaired, "write trainA/trainB/testA/testB domains");
  make->add_option("--test-count", synth.test_count, "test images per domain (unpaired)");

  ConfigFlags acan_flags;
  acan::TrainAcanOptions acan_opts;
  auto* train_acan = app.add_subcommand("train-acan", "train the attribute network on a label file");
  acan_flags.attach(train_acan);
  train_acan->add_flag("--resume", acan_opts.resume, "continue from <output_dir>/acan.ckpt");
  train_acan->add_option("--stop-after", acan_opts.stop_after, "stop once this many epochs are done");

  std::string eval_ckpt, eval_labels, eval_out;
  auto* eval = app.add_subcommand("eval-acan", "report per-attribute error of a stored attribute network");
  eval->add_option("--checkpoint", eval_ckpt, "attribute network checkpoint")->required();
  eval->add_option("--labels", eval_labels, "label file")->required();
  eval->add_option("--out", eval_out, "also write the report to this file");

  ConfigFlags gan_flags;
  auto* train_gan = app.add_subcommand("train-gan", "attribute-guided CycleGAN training");
  gan_flags.attach(train_gan);

  std::string tr_ckpt, tr_direction = "ab", tr_out;
  std::vector<std::string> tr_inputs;
  auto* translate = app.add_subcommand("translate", "translate images with a stored CycleGAN");
  translate->add_option("--checkpoint", tr_ckpt, "translation checkpoint")->required();
  translate->add_option("--direction", tr_direction, "ab or ba");
  translate->add_option("--out", tr_out, "output directory")->required();
  translate->add_option("inputs", tr_inputs, "image files or directories")->required();

  std::string grid_ckpt, grid_direction = "ab", grid_out;
  std::vector<std::string> grid_inputs;
  auto* grid = app.add_subcommand("grid", "write an original / translated / reconstructed grid");
  grid->add_option("--checkpoint", grid_ckpt, "translation checkpoint")->required();
  grid->add_option("--direction", grid_direction, "ab or ba");
  grid->add_option("--out", grid_out, "output PNG")->required();
  grid->add_option("inputs", grid_inputs, "image files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; malformed command lines share the usage-error status
    return app.exit(e) == 0 ? 0 : 2;
  }

  auto paths = [](const std::vector<std::string>& v) { return std::vector<acan::fs::path>(v.begin(), v.end()); };
  try {
    if (*make) {
      synth.out_dir = synth_out;
      acan::cmd_make_synthetic(synth);
    } else if (*train_acan) {
      const auto records = acan::cmd_train_acan(acan_flags.resolve(), acan_opts);
      if (!records.empty()) {
        std::cout << "epoch " << records.back().epoch << " loss " << records.back().loss << "\n";
      }
    } else if (*eval) {
      const auto metrics = acan::cmd_eval_acan(eval_ckpt, eval_labels);
      const auto report = metrics.to_json(acan::AttributeSchema::canonical()).dump(2);
      std::cout << report << "\n";
      if (!eval_out.empty()) {
        std::ofstream f(eval_out);
        f << report << "\n";
        if (!f) throw acan::DataError("cannot write " + eval_out);
      }
    } else if (*train_gan) {
      acan::cmd_train_gan(gan_flags.resolve());
    } else if (*translate) {
      for (const auto& p : acan::cmd_translate(tr_ckpt, paths(tr_inputs), tr_direction, tr_out)) {
        std::cout << p.string() << "\n";
      }
    } else if (*grid) {
      acan::cmd_grid(grid_ckpt, paths(grid_inputs), grid_direction, grid_out);
    }
  } catch (const acan::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const acan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
