// crashkit: run the crash-analysis pipeline from a manifest.
//
//   crashkit kde       --manifest run.ini
//   crashkit run       --manifest run.ini --seed 7 --output out/
//   crashkit compare   out2019/lisa.csv out2020/lisa.csv -o changes.csv
//
// Exit codes: 0 success, 2 invalid input or manifest, 3 runtime failure.

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crashkit/common.hpp"
#include "crashkit/manifest.hpp"
#include "crashkit/pipeline.hpp"

namespace {

using namespace crashkit;
using Command = std::function<pipeline::OutputSet(const RunManifest&, const pipeline::Inputs&)>;

struct ManifestArgs {
  std::string path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string output;
};

void add_manifest_options(CLI::App* sub, ManifestArgs& args) {
  sub->add_option("-m,--manifest", args.path, "Run manifest (INI)")->required()->check(CLI::ExistingFile);
  sub->add_option("--set", args.overrides, "Override a manifest value, e.g. --set kde.bandwidth=150");
  sub->add_option("--seed", args.seed, "Override [run] seed");
  sub->add_option("-o,--output", args.output, "Override [run] output directory");
}

int run_command(const ManifestArgs& args, const Command& command, bool quiet) {
  auto overrides = args.overrides;
  if (!args.seed.empty()) overrides.push_back("run.seed=" + args.seed);
  auto manifest = load_manifest(args.path, overrides);
  if (!args.output.empty()) manifest.output_dir = args.output;

  const auto inputs = pipeline::load_inputs(manifest);
  const auto outputs = command(manifest, inputs);
  pipeline::write_outputs(outputs, manifest.output_dir);
  if (!quiet) {
    for (const auto& w : inputs.dataset.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& m : outputs.messages) std::cerr << m << "\n";
    std::cerr << "wrote " << outputs.files.size() << " files to " << manifest.output_dir.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal crash analysis: network KDE, Moran's I/LISA, geodetector, tensor patterns"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress the stderr summary");

  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"kde", {"Network kernel density per lixel", pipeline::cmd_kde}},
      {"moran", {"Global Moran's I and LISA clusters of zone SWI", pipeline::cmd_moran}},
      {"geodetect", {"Factor and interaction detector over POI categories", pipeline::cmd_geodetect}},
      {"tensor", {"Nonnegative Tucker decomposition of zone x age x hour SWI", pipeline::cmd_tensor}},
      {"report", {"Summary totals and day x hour heatmap", pipeline::cmd_report}},
      {"run", {"Every command the manifest has inputs for", pipeline::cmd_run}},
  };
  std::map<std::string, ManifestArgs> args;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, spec] : commands) {
    subs[name] = app.add_subcommand(name, spec.first);
    add_manifest_options(subs[name], args[name]);
  }

  std::string before, after, changes_out;
  auto* compare = app.add_subcommand("compare", "Zone-wise LISA cluster changes between two runs");
  compare->add_option("before", before, "Earlier lisa.csv")->required()->check(CLI::ExistingFile);
  compare->add_option("after", after, "Later lisa.csv")->required()->check(CLI::ExistingFile);
  compare->add_option("-o,--output", changes_out, "Write changes.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (compare->parsed()) {
      std::vector<autocorr::ClusterComparison> changes;
      try {
        changes = autocorr::compare_clusters(pipeline::read_lisa_csv(before), pipeline::read_lisa_csv(after));
      } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
      }
      pipeline::OutputSet out;
      const auto text = pipeline::changes_csv(changes);
      if (changes_out.empty()) {
        std::cout << text;
      } else {
        const std::filesystem::path target(changes_out);
        out.files[target.filename().string()] = text;
        pipeline::write_outputs(out, target.has_parent_path() ? target.parent_path() : ".");
      }
      return 0;
    }
    for (const auto& [name, spec] : commands) {
      if (subs[name]->parsed()) return run_command(args[name], spec.second, quiet);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
