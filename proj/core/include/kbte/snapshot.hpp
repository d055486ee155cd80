#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "kbte/phase_space.hpp"

namespace kbte {

/// Hex SHA-1 of "blob <size>\0" + bytes, as git computes it.
std::string git_blob_hash(const std::string& bytes);

struct SnapshotInfo {
  int step = 0;
  double t = 0.0;
  std::string content_hash;
  std::map<std::string, std::string> metadata;
};

/// Writes <stem>.bin (little-endian doubles in node order) and <stem>.json
/// (grids, representation, step, time, metadata and the content hash).
SnapshotInfo write_snapshot(const std::filesystem::path& stem, const DistributionField& field,
                            int step, double t,
                            const std::map<std::string, std::string>& metadata = {});

/// Reads a snapshot written for the same phase space. Throws IoError on a
/// missing file, a grid mismatch or a content-hash mismatch.
DistributionField read_snapshot(const std::filesystem::path& stem,
                                std::shared_ptr<const PhaseSpace> space,
                                SnapshotInfo* info = nullptr);

}  // namespace kbte
