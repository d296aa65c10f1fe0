#pragma once

#include <map>

#include "vlnforge/config.hpp"

namespace vlnforge {

class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& cause)
        : Error("stage '" + stage + "' failed: " + cause), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct RunManifest {
    Json config;
    std::string config_sha256;
    std::map<std::string, double> stage_seconds;
    std::map<std::string, std::string> outputs;  // relative path -> sha256
    size_t triplet_count = 0;

    Json to_json() const;
};

/// End-to-end generation: synth -> graph -> label -> triplets -> stats,
/// scenes scheduled across `jobs` threads. Outputs are byte-identical
/// for a fixed config regardless of the job count; on failure partial
/// outputs are moved to "<out>.quarantine".
RunManifest run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct ValidationCheck {
    std::string name;
    size_t checked = 0;
    size_t violations = 0;
    std::vector<std::string> details;  // first few violation descriptions
};

struct ValidationReport {
    std::vector<std::string> structural_errors;
    std::vector<ValidationCheck> checks;
    std::map<std::string, double> coverage;  // per scene, informational

    bool ok() const;
    Json to_json() const;
};

/// Re-derives every recorded artifact of a dataset directory and
/// rechecks the module invariants: node spacing, edge soundness
/// (geodesic + visibility), triplet validity (adjacency, hop range,
/// goal predicate, box soundness) and grounding consistency.
ValidationReport validate_dataset(const std::filesystem::path& dir);

}  // namespace vlnforge
