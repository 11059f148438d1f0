#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "medfront/errors.hpp"

namespace {

// 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
int run(const std::string& command, const std::string& config_path,
        int jobs_override, std::int64_t seed_override) {
  using namespace medfront;
  try {
    cli::RunConfig raw = cli::read_config_file(config_path);
    if (jobs_override > 0) raw.jobs = jobs_override;
    if (seed_override >= 0) raw.seed = static_cast<std::uint64_t>(seed_override);
    const cli::RunConfig cfg = cli::resolve(raw);

    if (command == "preprocess") {
      cli::cmd_preprocess(cfg, std::cout, std::cerr);
    } else if (command == "extract") {
      cli::cmd_extract(cfg, std::cout, std::cerr);
    } else if (command == "train") {
      cli::cmd_train(cfg, std::cout, std::cerr);
    } else if (command == "eval") {
      cli::cmd_eval(cfg, std::cout, std::cerr);
    } else {
      cli::cmd_compare(cfg, std::cout, std::cerr);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "medfront: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "medfront: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "medfront: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "medfront: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Compare fixed and learnable audio frontends on medical-sound "
      "classification: preprocess a corpus, extract features, train, "
      "evaluate, and run paired statistics."};
  app.require_subcommand(1);

  std::string config_path;
  int jobs_override = 0;          // 0 = keep the config's value
  std::int64_t seed_override = -1;  // < 0 = keep the config's value

  const struct {
    const char* name;
    const char* help;
  } commands[] = {
      {"preprocess",
       "segment, bandpass, resample, and duration-fit a corpus; writes "
       "segment WAVs and the split manifest"},
      {"extract",
       "dump feature maps and PGM images for the configured frontends"},
      {"train", "train the frontend + classifier; writes a checkpoint bundle"},
      {"eval", "score a checkpoint on the test partition"},
      {"compare",
       "paired McNemar comparison of the three frontends' checkpoints"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "run configuration file")
        ->required();
    sub->add_option("--jobs", jobs_override,
                    "override the config's worker thread count");
    sub->add_option("--seed", seed_override, "override the config's seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  return run(app.get_subcommands().front()->get_name(), config_path,
             jobs_override, seed_override);
}
