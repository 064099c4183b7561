#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "umot/cli/scenario.hpp"

namespace umot::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct OutputFile {
  std::string path;  ///< relative to the run directory
  std::uintmax_t bytes = 0;
  std::string digest;
};

struct RunManifest {
  std::string config_hash;
  std::string artifact_version = kArtifactVersion;
  std::string started;
  std::string finished;
  std::string status;  ///< "ok" or "failed"
  std::string failed_stage;
  std::string message;
  std::vector<OutputFile> outputs;
};

std::string manifest_to_json(const RunManifest& m);

/// Failure of one pipeline stage; what() names the stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message);
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOptions {
  int threads = 1;
  bool allow_noncertified = false;
  /// Stop after the forward stage (the `forward` subcommand).
  bool forward_only = false;
};

/// Writes artifacts (and always manifest.json) into out_dir. Returns the
/// manifest on success; throws StageError after writing the manifest when a stage fails.
RunManifest run_pipeline(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                         const PipelineOptions& options = {});

/// Writes one file and records it in the manifest.
void write_output(RunManifest& manifest, const std::filesystem::path& out_dir, const std::string& name,
                  const std::string& content);

/// UTC timestamp; SOURCE_DATE_EPOCH, when set, pins it for reproducible manifests.
std::string timestamp_now();

}  // namespace umot::cli
