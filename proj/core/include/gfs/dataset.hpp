#pragma once

#include <string>

#include "gfs/graph.hpp"

namespace gfs {

enum class Task { multiclass, binary };

struct Dataset {
  std::string name;
  Task task = Task::multiclass;
  Graph graph;
  FeatureMatrix features;
  LabelVector labels;
  DataSplit split;

  // Throws DataError when the parts disagree on N or the split is invalid.
  void validate() const;
};

}  // namespace gfs
