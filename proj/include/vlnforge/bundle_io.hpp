#pragma once

#include <filesystem>

#include "vlnforge/bundle.hpp"

namespace vlnforge {

class BundleError : public Error {
public:
    enum class Kind { MissingFile, VersionMismatch, ChecksumMismatch, Parse };

    BundleError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

constexpr int kBundleFormatVersion = 1;

struct SaveOptions {
    bool write_views = true;  // node view data in addition to manifest/field/truth
};

/// Writes a bundle directory per format.md. Returns the manifest's
/// file->sha256 map contents indirectly via the manifest itself.
void save_bundle(const SceneBundle& bundle, const std::filesystem::path& dir,
                 const SaveOptions& opts = {});

struct LoadOptions {
    bool load_views = true;  // read stored view data into the nodes
    bool verify = true;      // check sha256 digests of the files read
};

SceneBundle load_bundle(const std::filesystem::path& dir, const LoadOptions& opts = {});

/// Reads a single stored view without loading the whole bundle.
ViewObservation load_view(const std::filesystem::path& bundle_dir, const SceneBundle& bundle,
                          int node_id, int view_index, bool verify = false);

}  // namespace vlnforge
