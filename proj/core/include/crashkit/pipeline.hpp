#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crashkit/autocorr.hpp"
#include "crashkit/ingest.hpp"
#include "crashkit/manifest.hpp"

namespace crashkit::pipeline {

/// Files produced by a command, keyed by name relative to the output
/// directory. Nothing touches the disk until write_outputs().
struct OutputSet {
  std::map<std::string, std::string> files;
  std::vector<std::string> messages;  // summary lines for stderr

  void merge(OutputSet other);
};

/// Loaded inputs plus the crashes that pass the manifest filter.
struct Inputs {
  ingest::Dataset dataset;
  std::vector<ingest::CrashRecord> crashes;
};

Inputs load_inputs(const RunManifest& manifest);

OutputSet cmd_kde(const RunManifest& manifest, const Inputs& inputs);
OutputSet cmd_moran(const RunManifest& manifest, const Inputs& inputs);
OutputSet cmd_geodetect(const RunManifest& manifest, const Inputs& inputs);
OutputSet cmd_tensor(const RunManifest& manifest, const Inputs& inputs);
OutputSet cmd_report(const RunManifest& manifest, const Inputs& inputs);

/// Every command whose inputs the manifest provides; report always runs.
OutputSet cmd_run(const RunManifest& manifest, const Inputs& inputs);

std::vector<autocorr::LisaResult> read_lisa_csv(const std::string& path);
std::string changes_csv(const std::vector<autocorr::ClusterComparison>& changes);

/// Creates the directory and writes each file through a temporary name.
void write_outputs(const OutputSet& outputs, const std::filesystem::path& dir);

}  // namespace crashkit::pipeline
