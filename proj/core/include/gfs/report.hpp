#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfs/experiments.hpp"
#include "gfs/homophily.hpp"
#include "gfs/synth.hpp"

namespace gfs {

using Json = nlohmann::json;

inline constexpr const char* kArtifactName = "gfs";
const char* artifact_version();

Json to_json(const nn::ModelConfig& cfg);
Json to_json(const nn::GateConfig& cfg);
Json to_json(const MiEstimatorConfig& cfg);
// Omits supervision_indices; callers record how the rows were chosen.
Json to_json(const SelectionConfig& cfg);
Json to_json(const SynthConfig& cfg);
Json to_json(const ExperimentConfig& cfg);

Json to_json(const Partition& p);
Json to_json(const TfiReport& r);
Json to_json(const MetricReport& r);
Json to_json(const nn::TrainResult& r);
Json to_json(const ExperimentReport& r);

// {"artifact", "version", "command", "config", "result"}
Json make_envelope(const std::string& command, Json config, Json result);

// Pretty-printed with a trailing newline; object keys are sorted, so equal
// documents serialize to equal bytes.
void write_json(const std::filesystem::path& file, const Json& doc);

void write_csv(const std::filesystem::path& file, const FeatureTable& table);
// One row per cell: label, axis_value, starred, then <metric>_mean and
// <metric>_std for every metric of the first cell.
void write_cells_csv(const std::filesystem::path& file, const ExperimentReport& rep);
// Per-column TFI table used by the tfi command.
FeatureTable tfi_feature_table(const TfiReport& r);

}  // namespace gfs
