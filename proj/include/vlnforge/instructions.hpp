#pragma once

#include <string>

#include "vlnforge/core.hpp"

namespace vlnforge {

enum class InstructionMode { TemplateObj, TemplateSent };

InstructionMode instruction_mode_from_string(const std::string& s);
std::string to_string(InstructionMode mode);

/// Templated instruction text. `variant` selects among the shipped verb
/// and sentence banks (variant 0 is the canonical phrasing); callers
/// derive it from their rng so identical inputs give identical text.
/// Throws InvalidArgument for class names without a size prior/verb
/// entry or, in sentence mode, an empty room label.
std::string make_instruction(InstructionMode mode, const std::string& class_name,
                             const std::string& room_label, uint32_t variant);

}  // namespace vlnforge
