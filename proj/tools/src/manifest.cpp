#include "survood_cli/manifest.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "survood/errors.hpp"
#include "survood/io.hpp"

namespace survood::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestFormat = "survood.manifest/1";

bool is_manifest_name(const std::string& name) {
    return name.starts_with("manifest.") && name.ends_with(".json");
}

json artifacts_to_json(std::vector<Artifact> artifacts) {
    std::sort(artifacts.begin(), artifacts.end(),
              [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
    json list = json::array();
    for (const auto& a : artifacts) list.push_back({{"path", a.path}, {"sha256", a.sha256}});
    return list;
}

std::vector<Artifact> artifacts_from_json(const json& list, const fs::path& source) {
    std::vector<Artifact> out;
    try {
        for (const auto& item : list) {
            out.push_back({item.at("path").get<std::string>(), item.at("sha256").get<std::string>()});
        }
    } catch (const json::exception&) {
        throw InputError("manifest " + source.string() + ": malformed artifact list");
    }
    return out;
}

json read_manifest(const fs::path& path) {
    try {
        auto doc = json::parse(io::read_file(path));
        if (!doc.is_object() || doc.value("format", "") != kManifestFormat) {
            throw InputError("manifest " + path.string() + ": unrecognized format");
        }
        return doc;
    } catch (const json::parse_error& e) {
        throw InputError("manifest " + path.string() + ": " + e.what());
    }
}

}  // namespace

fs::path manifest_path(const fs::path& run_dir, std::string_view command) {
    return run_dir / ("manifest." + std::string(command) + ".json");
}

ManifestBuilder::ManifestBuilder(std::string command, fs::path run_dir, json config)
    : command_(std::move(command)), run_dir_(std::move(run_dir)), config_(std::move(config)) {}

std::string ManifestBuilder::display_path(const fs::path& path) const {
    const auto rel = path.lexically_normal().lexically_relative(run_dir_.lexically_normal());
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return path.generic_string();
}

void ManifestBuilder::add_input(const fs::path& path) {
    inputs_.push_back({display_path(path), io::sha256_hex(io::read_file(path))});
}

void ManifestBuilder::write_output(const fs::path& relative, std::string content) {
    outputs_.push_back({relative.generic_string(), io::sha256_hex(content)});
    contents_.push_back(std::move(content));
}

fs::path ManifestBuilder::finish() const {
    const json doc{{"format", kManifestFormat},
                   {"command", command_},
                   {"config", config_},
                   {"inputs", artifacts_to_json(inputs_)},
                   {"outputs", artifacts_to_json(outputs_)}};
    remove_previous_outputs(run_dir_, command_);
    for (std::size_t i = 0; i < outputs_.size(); ++i) io::write_file(run_dir_ / outputs_[i].path, contents_[i]);
    const auto path = manifest_path(run_dir_, command_);
    io::write_file(path, doc.dump(2) + "\n");
    return path;
}

void remove_previous_outputs(const fs::path& run_dir, std::string_view command) {
    const auto path = manifest_path(run_dir, command);
    if (!fs::exists(path)) return;
    const auto doc = read_manifest(path);
    for (const auto& a : artifacts_from_json(doc.value("outputs", json::array()), path)) {
        const fs::path p(a.path);
        if (p.is_relative()) fs::remove(run_dir / p);
    }
    fs::remove(path);
}

std::vector<AuditFinding> audit_run(const fs::path& run_dir) {
    std::map<std::string, std::set<std::string>> claims;  // path -> recorded hashes
    std::vector<AuditFinding> findings;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const auto name = entry.path().filename().string();
        if (!entry.is_regular_file() || !is_manifest_name(name)) continue;
        const auto doc = read_manifest(entry.path());
        for (const auto& a : artifacts_from_json(doc.value("outputs", json::array()), entry.path())) {
            claims[a.path].insert(a.sha256);
        }
    }
    std::set<std::string> seen;
    for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = entry.path().lexically_relative(run_dir).generic_string();
        if (rel.find('/') == std::string::npos && is_manifest_name(rel)) continue;
        seen.insert(rel);
        const auto it = claims.find(rel);
        if (it == claims.end()) {
            findings.push_back({rel, "not recorded in any manifest"});
        } else if (!it->second.count(io::sha256_hex(io::read_file(entry.path())))) {
            findings.push_back({rel, "content does not match the recorded hash"});
        }
    }
    for (const auto& [path, hashes] : claims) {
        if (!seen.count(path)) findings.push_back({path, "recorded in a manifest but missing"});
    }
    std::sort(findings.begin(), findings.end(),
              [](const AuditFinding& a, const AuditFinding& b) { return a.path < b.path; });
    return findings;
}

}  // namespace survood::cli
