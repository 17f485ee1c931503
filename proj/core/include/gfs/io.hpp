#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gfs/dataset.hpp"

namespace gfs {

enum class FeatureFormat { fbin, csv };

// Reads a dataset directory: edges.tsv, features.fbin or features.csv,
// labels.csv, meta.json and optionally splits.json. Without splits.json the
// split is random_split(N, split_seed). Errors are DataError with the file
// name, a line or byte offset, and the reason.
Dataset load_dataset(const std::filesystem::path& dir, std::uint64_t split_seed = 0);

// Writes the same layout (always including splits.json). Features are stored
// as float32 in fbin mode, so values must be float-representable for an
// exact round trip; csv uses 17 significant digits.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir,
                  FeatureFormat format = FeatureFormat::fbin);

std::vector<Edge> read_edges_tsv(const std::filesystem::path& file);
FeatureMatrix read_features_fbin(const std::filesystem::path& file);
FeatureMatrix read_features_csv(const std::filesystem::path& file);
std::vector<int> read_labels_csv(const std::filesystem::path& file);

void write_features_fbin(const FeatureMatrix& x, const std::filesystem::path& file);
void write_features_csv(const FeatureMatrix& x, const std::filesystem::path& file);

const char* to_string(Task task);
Task task_from_string(const std::string& name);

}  // namespace gfs
