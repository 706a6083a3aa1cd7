#pragma once

#include <iosfwd>
#include <string>

#include "cgp/sem.hpp"

namespace cgp {

inline constexpr const char* kModelFormat = "cgp-model/1";
inline constexpr int kModelVersion = 1;

/// Deterministic JSON text; doubles use the shortest decimal that parses back
/// to the same value.
std::string model_to_json(const ClusteredGpModel& model);
/// Throws kUnsupportedVersion for a newer format, kMalformedInput otherwise.
ClusteredGpModel model_from_json(const std::string& text);

void save_model(const ClusteredGpModel& model, const std::string& path);
ClusteredGpModel load_model(const std::string& path);

}  // namespace cgp
