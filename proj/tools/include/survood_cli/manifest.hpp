#pragma once
// Run manifests: every file a command writes is recorded with its SHA-256,
// alongside the resolved config and the hashes of the inputs it read.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace survood::cli {

struct Artifact {
    std::string path;  // relative to the run directory when inside it
    std::string sha256;
};

std::filesystem::path manifest_path(const std::filesystem::path& run_dir, std::string_view command);

class ManifestBuilder {
public:
    ManifestBuilder(std::string command, std::filesystem::path run_dir, nlohmann::json config);

    void add_input(const std::filesystem::path& path);
    // Stages `content` for run_dir / relative. Nothing touches the disk until finish().
    void write_output(const std::filesystem::path& relative, std::string content);

    const std::vector<Artifact>& outputs() const noexcept { return outputs_; }

    // Removes the outputs of the previous run of this command, writes the
    // staged files and manifest.<command>.json, and returns the manifest path.
    std::filesystem::path finish() const;

private:
    std::string display_path(const std::filesystem::path& path) const;

    std::string command_;
    std::filesystem::path run_dir_;
    nlohmann::json config_;
    std::vector<Artifact> inputs_;
    std::vector<Artifact> outputs_;
    std::vector<std::string> contents_;
};

// Deletes the outputs recorded by a previous run of `command` in run_dir, and
// that manifest itself, so a rerun with a narrower config leaves nothing behind.
void remove_previous_outputs(const std::filesystem::path& run_dir, std::string_view command);

struct AuditFinding {
    std::string path;
    std::string problem;
};

// Every file under run_dir must be a manifest or an output recorded by one
// with a matching hash, and every recorded output must exist.
std::vector<AuditFinding> audit_run(const std::filesystem::path& run_dir);

}  // namespace survood::cli
