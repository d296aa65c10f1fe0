#pragma once

#include <string>
#include <vector>

#include "vlnforge/core.hpp"

namespace vlnforge {

/// The 41-entry class vocabulary shipped with the synthetic scenes:
/// index 0 is "void", 1..3 are structural stuff, the rest are thing
/// classes the generator can place.
const std::vector<std::string>& default_class_vocabulary();

/// Classes excluded from 3D instance extraction (void + structure).
const std::vector<uint16_t>& default_stuff_classes();

/// Room type labels used by the generator and sentence templates.
const std::vector<std::string>& room_types();

int class_index(const std::vector<std::string>& vocab, const std::string& name);

/// Verbs applicable to a class, canonical verb first.
const std::vector<std::string>& verbs_for_class(const std::string& class_name);

/// Sentence skeletons with {room}, {verb} and {object} slots,
/// canonical skeleton first.
const std::vector<std::string>& sentence_templates();

/// Horizontal footprints stay small so objects remain visible past
/// their own front surface from nearby nodes; heights may vary more.
struct SizePrior {
    double min_xy = 0.2;
    double max_xy = 0.4;
    double min_z = 0.3;
    double max_z = 0.8;
    enum class Mount { Floor, Wall, Ceiling } mount = Mount::Floor;
};

/// Placement/size prior for a thing class; throws InvalidArgument for
/// unknown names.
const SizePrior& size_prior(const std::string& class_name);

}  // namespace vlnforge
