#include "medfront/datasets/types.hpp"

#include <stdexcept>

namespace medfront::datasets {

std::string label_name(Label label) {
  return label == Label::kNormal ? "normal" : "abnormal";
}

Label label_from_name(const std::string& name) {
  if (name == "normal") return Label::kNormal;
  if (name == "abnormal") return Label::kAbnormal;
  throw std::invalid_argument("label_from_name: unknown label '" + name +
                              "' (expected normal or abnormal)");
}

std::string partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain:
      return "train";
    case Partition::kVal:
      return "val";
    case Partition::kTest:
      return "test";
  }
  throw std::invalid_argument("partition_name: unknown partition");
}

Partition partition_from_name(const std::string& name) {
  if (name == "train") return Partition::kTrain;
  if (name == "val") return Partition::kVal;
  if (name == "test") return Partition::kTest;
  throw std::invalid_argument("partition_from_name: unknown partition '" +
                              name + "' (expected train, val, or test)");
}

}  // namespace medfront::datasets
