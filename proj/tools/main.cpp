// adsieve command line: runs one pipeline stage or all of them.

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adsieve/error.hpp"
#include "adsieve/pipeline.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::vector<std::string> overrides;
};

adsieve::RunConfig LoadConfig(const Options& opts) {
  adsieve::RunConfig config = opts.config_path.empty()
                                  ? adsieve::RunConfig()
                                  : adsieve::RunConfig::FromFile(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw adsieve::ConfigError("--set expects key=value, got '" + kv + "'");
    config.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed) config.Set("seed", std::to_string(*opts.seed));
  if (opts.workers) config.workers = *opts.workers;
  if (!opts.out.empty()) config.out_dir = opts.out;
  config.Validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adsieve: page-load graph construction, ad/tracker labeling and classification"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Options opts;
  app.add_option("--config", opts.config_path, "Run configuration (key = value lines)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opts.seed, "Global seed; overrides the config");
  app.add_option("--workers", opts.workers, "Worker threads for page-level stages")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", opts.out, "Run directory");
  app.add_option("--set", opts.overrides, "Override one config key (key=value); repeatable");

  using Stage = std::function<void(adsieve::Pipeline&)>;
  const std::vector<std::tuple<std::string, std::string, Stage>> stages = {
      {"synth", "Generate the synthetic corpus", [](auto& p) { p.Synth(); }},
      {"build", "Build page-load graphs from logs", [](auto& p) { p.Build(); }},
      {"label", "Label URL nodes with the filter lists", [](auto& p) { p.LabelUrls(); }},
      {"featurize", "Extract the feature dataset and CDF data", [](auto& p) { p.Featurize(); }},
      {"train", "Train the forest on the full dataset", [](auto& p) { p.Train(); }},
      {"evaluate", "Page-stratified k-fold cross-validation", [](auto& p) { p.Evaluate(); }},
      {"ablate", "Cross-validate all 15 feature-family subsets", [](auto& p) { p.Ablate(); }},
      {"obfuscate", "Obfuscation robustness experiments", [](auto& p) { p.Obfuscate(); }},
      {"pipeline", "Run every stage in order", [](auto& p) { p.Run(); }},
  };
  std::map<CLI::App*, Stage> dispatch;
  for (const auto& [name, help, stage] : stages) dispatch[app.add_subcommand(name, help)] = stage;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    adsieve::Pipeline pipeline(LoadConfig(opts));
    for (const auto& [sub, stage] : dispatch) {
      if (sub->parsed()) stage(pipeline);
    }
    std::cout << "config_hash=" << pipeline.config_hash() << " out=" << pipeline.config().out_dir.string()
              << "\n";
    return 0;
  } catch (const adsieve::Error& e) {
    std::cerr << "adsieve: " << e.what() << "\n";
    return e.kind() == adsieve::Error::Kind::kData ? kExitData : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "adsieve: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
