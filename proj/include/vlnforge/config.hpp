#pragma once

#include "vlnforge/episode.hpp"
#include "vlnforge/fusion.hpp"
#include "vlnforge/json_util.hpp"
#include "vlnforge/nav_graph.hpp"
#include "vlnforge/synth.hpp"
#include "vlnforge/triplets.hpp"

namespace vlnforge {

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Whole-pipeline configuration. Serialization is canonical (sorted
/// keys, shortest round-trip floats) so the config hash is stable, and
/// parsing rejects unknown keys at every level.
struct PipelineConfig {
    uint64_t seed = 1;
    int jobs = 1;
    int scenes = 5;
    bool write_views = false;
    SynthParams synth;
    GraphParams graph;
    FusionParams fusion;
    TripletParams triplets;
    MetricOptions eval;

    void check() const;
    Json to_json() const;
    static PipelineConfig from_json(const Json& j);  // throws ConfigError
    static PipelineConfig load(const std::filesystem::path& path);

    std::string canonical() const { return to_json().dump(2) + "\n"; }
    std::string sha256() const;
};

}  // namespace vlnforge
