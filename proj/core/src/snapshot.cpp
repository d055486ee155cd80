#include "kbte/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "kbte/errors.hpp"

namespace kbte {

static_assert(std::endian::native == std::endian::little, "snapshots assume little-endian hosts");

std::string git_blob_hash(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw IoError("SHA-1 digest failed");
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return stem.parent_path() / (stem.filename().string() + ext);
}

nlohmann::json grid_json(const PhaseSpace& s) {
  return {{"spatial_points_per_axis", s.x_grid().points_per_axis()},
          {"spatial_nodes", s.nx()},
          {"velocity_cutoff", s.v_grid().cutoff()},
          {"velocity_points_per_axis", s.v_grid().points_per_axis()},
          {"velocity_nodes", s.nv()}};
}

}  // namespace

SnapshotInfo write_snapshot(const std::filesystem::path& stem, const DistributionField& field,
                            int step, double t,
                            const std::map<std::string, std::string>& metadata) {
  std::string bytes(field.values.size() * sizeof(double), '\0');
  std::memcpy(bytes.data(), field.values.data(), bytes.size());
  SnapshotInfo info{step, t, git_blob_hash(bytes), metadata};

  nlohmann::json header;
  header["grids"] = grid_json(*field.space);
  header["representation"] =
      field.rep == Representation::Full ? "full" : "weighted_perturbation";
  header["step"] = step;
  header["t"] = t;
  header["content_hash"] = info.content_hash;
  header["metadata"] = metadata;
  header["data"] = with_suffix(stem, ".bin").filename().string();

  if (stem.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(stem.parent_path(), ec);
  }
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw IoError("cannot write " + with_suffix(stem, ".bin").string());
  bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  std::ofstream js(with_suffix(stem, ".json"));
  if (!js) throw IoError("cannot write " + with_suffix(stem, ".json").string());
  js << header.dump(2) << '\n';
  if (!bin || !js) throw IoError("failed writing snapshot " + stem.string());
  return info;
}

DistributionField read_snapshot(const std::filesystem::path& stem,
                                std::shared_ptr<const PhaseSpace> space, SnapshotInfo* info) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw IoError("cannot read " + with_suffix(stem, ".json").string());
  nlohmann::json header;
  try {
    js >> header;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed snapshot header: ") + e.what());
  }
  if (header.value("grids", nlohmann::json{}) != grid_json(*space)) {
    throw IoError("snapshot grids do not match the phase space");
  }
  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw IoError("cannot read " + with_suffix(stem, ".bin").string());
  std::ostringstream buf;
  buf << bin.rdbuf();
  const std::string bytes = buf.str();
  if (bytes.size() != space->size() * sizeof(double)) throw IoError("snapshot has the wrong size");
  const std::string hash = git_blob_hash(bytes);
  if (hash != header.value("content_hash", std::string{})) {
    throw IoError("snapshot content hash mismatch");
  }
  DistributionField field;
  field.space = std::move(space);
  field.rep = header.value("representation", std::string{}) == "full"
                  ? Representation::Full
                  : Representation::WeightedPerturbation;
  field.values.resize(field.space->size());
  std::memcpy(field.values.data(), bytes.data(), bytes.size());
  if (info) {
    info->step = header.value("step", 0);
    info->t = header.value("t", 0.0);
    info->content_hash = hash;
    info->metadata = header.value("metadata", std::map<std::string, std::string>{});
  }
  return field;
}

}  // namespace kbte
