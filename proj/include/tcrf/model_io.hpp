#pragma once

#include <filesystem>

#include "tcrf/training.hpp"

namespace tcrf {

// Versioned binary model container (magic "TCRF", little-endian sections:
// domain, feature spec, forests, co-occurrence tables, theta, metadata).
// Writes are atomic (temp file + rename); round trips are byte-exact.
void save_model(const std::filesystem::path& path, const TcrfModel& model);
TcrfModel load_model(const std::filesystem::path& path);

} // namespace tcrf
