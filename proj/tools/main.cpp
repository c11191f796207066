#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "purets/errors.hpp"
#include "purets/io.hpp"
#include "purets/runner.hpp"

namespace {

/// Flat key=value config file reader: names are the long flags without the
/// leading dashes, one per line, '#' starts a comment. Keys are routed to
/// the subcommand being run, and values given on the command line win.
class FlatConfig : public CLI::Config {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    std::string out;
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        out += name + "=" + CLI::detail::join(opt->results(), " ") + "\n";
      } else if (default_also && !opt->get_default_str().empty()) {
        out += name + "=" + opt->get_default_str() + "\n";
      }
    }
    return out;
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    // the config is processed after argv, so the chosen subcommand is known
    std::vector<std::string> parents;
    for (const CLI::App* sub : app_->get_subcommands()) {
      parents.push_back(sub->get_name());
    }
    std::vector<CLI::ConfigItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string text = CLI::detail::trim_copy(line);
      if (text.empty() || text.front() == '#') continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) {
        throw CLI::ConfigError("config line " + std::to_string(line_no) +
                               " is not key=value: " + text);
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = CLI::detail::trim_copy(text.substr(0, eq));
      const std::string value = CLI::detail::trim_copy(text.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        item.inputs.push_back(value.substr(1, value.size() - 2));
      } else {
        std::istringstream words(value);
        std::string word;
        while (words >> word) item.inputs.push_back(word);
        if (item.inputs.empty()) item.inputs.emplace_back();
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

struct CliState {
  purets::RunConfig cfg;
  std::string model = "purets";
  std::string optimizer = "adam";
  std::string subset = "test";
  std::filesystem::path checkpoint;
  std::filesystem::path metrics_dir;
  long long bench_batch = 1;
  long long bench_warmup = 3;
  long long bench_repeats = 20;
  long long bench_threads = 1;
  purets::Figure3Options fig;
};

void add_data_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--dataset", st.cfg.dataset,
                  "Registry dataset name, or 'sine' for the synthetic series")
      ->capture_default_str();
  cmd->add_option("--registry", st.cfg.registry, "Dataset registry JSON file")
      ->capture_default_str();
  cmd->add_option("--csv", st.cfg.csv,
                  "Load this CSV directly, bypassing the registry");
  cmd->add_option("--split", st.cfg.split,
                  "Split policy override, e.g. 6/2/2 or 12/4/4m");
  cmd->add_option("--rows-per-day", st.cfg.rows_per_day,
                  "Rows per day, used by months-based splits")
      ->capture_default_str();
  cmd->add_option("--sine-points", st.cfg.sine.n_points, "Sine series length")
      ->capture_default_str();
  cmd->add_option("--sine-step", st.cfg.sine.step, "Sine argument step")
      ->capture_default_str();
  cmd->add_option("--sine-amplitude", st.cfg.sine.amplitude, "Sine amplitude")
      ->capture_default_str();
  cmd->add_option("--sine-phase", st.cfg.sine.phase, "Sine phase offset")
      ->capture_default_str();
  cmd->add_option("--sine-noise", st.cfg.sine.noise_std,
                  "Gaussian noise std added to the sine")
      ->capture_default_str();
  cmd->add_option("--sine-seed", st.cfg.sine.seed, "Sine noise seed")
      ->capture_default_str();
}

void add_model_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--model", st.model, "purets | purets_s | sigmoid_mlp")
      ->capture_default_str();
  cmd->add_option("--depth", st.cfg.depth, "Number of temporal layers")
      ->capture_default_str();
  cmd->add_option("--hidden", st.cfg.hidden,
                  "Interior layer widths (default: max of window and horizon)");
  cmd->add_option("--window", st.cfg.input_window,
                  "Input window length T (0: same as horizon)")
      ->capture_default_str();
  cmd->add_option("--horizon", st.cfg.horizon, "Forecast horizon T'")
      ->capture_default_str();
}

void add_out_option(CLI::App* cmd, std::filesystem::path& target) {
  cmd->add_option("--out", target,
                  "Output directory (env PURETS_OUT)")
      ->envname("PURETS_OUT")
      ->capture_default_str();
}

// Predictions fluctuating more than 15% above the ground truth's total
// variation get called out; the threshold is a reporting convention.
constexpr double kOverFluctuation = 1.15;

void print_report(const purets::MetricReport& r, const std::string& label) {
  using purets::format_double;
  std::cout << label << " mse " << format_double(r.mse) << " mae "
            << format_double(r.mae) << " rse " << format_double(r.rse)
            << " corr " << format_double(r.corr) << " fluctuation "
            << format_double(r.fluctuation_index)
            << (r.fluctuation_index > kOverFluctuation ? " (over-fluctuating)"
                                                       : "")
            << " peak " << format_double(r.peak_amplitude_ratio)
            << " windows " << r.n_samples << '\n';
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  Eigen::setNbThreads(1);
  CliState st;

  CLI::App app{
      "Long-horizon time-series forecasting with pure linear layer stacks"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Flat key=value config file; flags override it");
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.allow_config_extras(false);

  auto* train = app.add_subcommand(
      "train", "Train a model and score it on the test split");
  train->fallthrough();
  add_data_options(train, st);
  add_model_options(train, st);
  add_out_option(train, st.cfg.out_dir);
  train->add_flag("--per-channel", st.cfg.per_channel,
                  "Train one independent temporal stack per channel (purets)");
  train->add_option("--seed", st.cfg.seed, "Weight init / shuffling seed")
      ->capture_default_str();
  train->add_option("--optimizer", st.optimizer, "adam | sgd")
      ->capture_default_str();
  train->add_option("--lr", st.cfg.train.learning_rate, "Learning rate")
      ->capture_default_str();
  train->add_option("--batch", st.cfg.train.batch_size, "Minibatch size")
      ->capture_default_str();
  train->add_option("--max-epochs", st.cfg.train.max_epochs, "Epoch budget")
      ->capture_default_str();
  train->add_option("--patience", st.cfg.train.patience,
                    "Epochs without val improvement before stopping")
      ->capture_default_str();
  train->add_option("--train-stride", st.cfg.train.stride,
                    "Stride between training windows")
      ->capture_default_str();
  train->callback([&st] {
    st.cfg.kind = purets::parse_model_kind(st.model);
    st.cfg.train.optimizer = purets::parse_optimizer(st.optimizer);
    const purets::TrainArtifacts art = purets::run_train(st.cfg);
    for (const auto& w : art.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "best epoch " << art.result.best_epoch << " of "
              << art.result.epochs_run << " (val mse "
              << purets::format_double(art.result.best_val_loss) << ")\n";
    print_report(art.test_report, "test");
    print_files(art.files);
  });

  auto* eval = app.add_subcommand(
      "eval", "Score a saved checkpoint on one split of a dataset");
  eval->fallthrough();
  add_data_options(eval, st);
  add_out_option(eval, st.cfg.out_dir);
  eval->add_option("--checkpoint", st.checkpoint, "Checkpoint file")
      ->required();
  eval->add_option("--subset", st.subset, "train | val | test")
      ->capture_default_str();
  eval->callback([&st] {
    const purets::EvalArtifacts art = purets::run_eval(
        st.cfg, st.checkpoint, purets::parse_split(st.subset));
    print_report(art.report, st.subset);
    print_files(art.files);
  });

  auto* profile = app.add_subcommand(
      "profile",
      "Cost/latency profile across horizons 48, 168, 336 and 720");
  profile->fallthrough();
  add_model_options(profile, st);
  add_out_option(profile, st.cfg.out_dir);
  profile->add_option("--channels", st.cfg.channels,
                      "Channel count the profiled model should assume")
      ->capture_default_str();
  profile->add_option("--metrics-dir", st.metrics_dir,
                      "Directory with h<horizon>/metrics.json files used to "
                      "fill the scatter mse column");
  profile->callback([&st] {
    st.cfg.kind = purets::parse_model_kind(st.model);
    const purets::ProfileArtifacts art =
        purets::run_profile(st.cfg, st.metrics_dir);
    for (const auto& r : art.reports) {
      std::cout << r.shape_summary << ": parameters " << r.parameter_count
                << ", macs " << r.mac_count << ", mean latency "
                << purets::format_double(r.mean_latency_s) << "s\n";
    }
    print_files(art.files);
  });

  auto* figure3 = app.add_subcommand(
      "figure3", "Five-condition synthetic sine fitting study");
  figure3->fallthrough();
  add_out_option(figure3, st.fig.out_dir);
  figure3->add_option("--points", st.fig.n_points, "Sine series length")
      ->capture_default_str();
  figure3->add_option("--epochs", st.fig.max_epochs,
                      "Fixed epoch budget per condition")
      ->capture_default_str();
  figure3->add_option("--lr", st.fig.learning_rate, "Learning rate")
      ->capture_default_str();
  figure3->add_option("--seed", st.fig.seed, "Base seed")
      ->capture_default_str();
  figure3->callback([&st] {
    const purets::Figure3Summary s = purets::run_figure3(st.fig);
    for (const auto& c : s.conditions) {
      print_report(c.report, c.name);
    }
    std::cout << "depth-1 vs depth-2 mse ratio "
              << purets::format_double(s.depth_mse_ratio) << '\n';
    std::cout << "fluctuation index: linear "
              << purets::format_double(s.fi_linear) << ", sigmoid "
              << purets::format_double(s.fi_sigmoid) << '\n';
    print_files(s.files);
  });

  auto* bench = app.add_subcommand(
      "bench", "Latency benchmark for one model configuration");
  bench->fallthrough();
  add_model_options(bench, st);
  add_out_option(bench, st.cfg.out_dir);
  bench->add_option("--channels", st.cfg.channels,
                    "Channel count the model should assume")
      ->capture_default_str();
  bench->add_option("--batch", st.bench_batch, "Windows per forward pass")
      ->capture_default_str();
  bench->add_option("--warmup", st.bench_warmup, "Untimed warmup passes")
      ->capture_default_str();
  bench->add_option("--repeats", st.bench_repeats, "Timed passes")
      ->capture_default_str();
  bench->add_option("--threads", st.bench_threads,
                    "Math threads (effective only in OpenMP builds)")
      ->capture_default_str();
  bench->callback([&st] {
    st.cfg.kind = purets::parse_model_kind(st.model);
    Eigen::setNbThreads(static_cast<int>(st.bench_threads));
    const purets::ProfileReport r = purets::run_bench(
        st.cfg, st.bench_batch, st.bench_warmup, st.bench_repeats);
    std::cout << purets::profile_report_to_json(r);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const purets::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const purets::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
