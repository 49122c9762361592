#pragma once

#include <filesystem>
#include <string>

#include "qembed/model.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return QEMBED_SOURCE_DIR; }

inline qembed::IntegralFile shipped(const std::string& name) {
  return qembed::read_integrals(source_dir() / "data" / "models" / (name + ".ints"));
}

}  // namespace testing_support
