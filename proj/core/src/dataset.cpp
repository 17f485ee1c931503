#include "gfs/dataset.hpp"

#include <string>

#include "gfs/error.hpp"

namespace gfs {

void Dataset::validate() const {
  const std::size_t n = graph.num_nodes();
  if (features.num_nodes() != n) {
    throw DataError("features have " + std::to_string(features.num_nodes()) + " rows, graph has " +
                    std::to_string(n) + " nodes");
  }
  if (labels.num_nodes() != n) {
    throw DataError("labels have " + std::to_string(labels.num_nodes()) + " entries, graph has " +
                    std::to_string(n) + " nodes");
  }
  if (task == Task::binary && labels.num_classes() != 2) {
    throw DataError("binary task requires num_classes == 2");
  }
  try {
    split.validate(n);
  } catch (const DataError& e) {
    throw DataError(std::string("split: ") + e.what());
  }
}

}  // namespace gfs
