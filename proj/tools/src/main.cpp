// rset command-line entry point: one verb per pipeline stage.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rset/common/error.hpp"
#include "rset_tools/pipeline.hpp"

namespace {

int report_error(std::string_view kind, const std::string& message) {
  std::cerr << "rset: error[" << kind << "]: " << message << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking-based emotion intensity pipeline on synthetic or precomputed features"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<double> alphas;
  app.add_option("--config", config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Root seed for every stage");
  app.add_option("--out", out, "Output directory");
  app.add_option("--alpha", alphas, "Intensity control value; repeat for a sweep")->take_all()->allow_extra_args(false);

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"gen", "Write a synthetic corpus, latent file and embeddings"},
      {"rank", "Standardize features and train the ranking model(s)"},
      {"remap", "Score utterances and remap intensities per class"},
      {"pool", "Build the emotion-embedding candidate pool"},
      {"train-extractor", "Train the intensity extractor and emotion classifier"},
      {"mi", "Fit the variational net and report the decoupling losses"},
      {"fuse", "Sweep alpha, select candidates and fuse them by attention"},
      {"report", "Merge stage reports into summary files"},
      {"all", "Run every stage in order, then report"},
  };
  for (const auto& [name, help] : verbs) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    auto config = config_path.empty() ? rset::tools::PipelineConfig{} : rset::tools::load_config(config_path);
    if (seed) config.seed = *seed;
    if (out) config.out = *out;
    if (!alphas.empty()) config.alpha = alphas;
    const std::string verb = app.get_subcommands().front()->get_name();
    rset::tools::run_command(verb, config);
    std::cout << "rset " << verb << ": ok (" << config.out << ")\n";
    return 0;
  } catch (const rset::Error& e) {
    return report_error(rset::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
}
