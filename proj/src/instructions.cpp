#include "vlnforge/instructions.hpp"

#include "vlnforge/vocab.hpp"

namespace vlnforge {

InstructionMode instruction_mode_from_string(const std::string& s) {
    if (s == "template-obj") return InstructionMode::TemplateObj;
    if (s == "template-sent") return InstructionMode::TemplateSent;
    throw InvalidArgument("unknown instruction mode: " + s);
}

std::string to_string(InstructionMode mode) {
    return mode == InstructionMode::TemplateObj ? "template-obj" : "template-sent";
}

namespace {

std::string replace_slot(std::string text, const std::string& slot, const std::string& value) {
    const auto pos = text.find(slot);
    if (pos != std::string::npos) text.replace(pos, slot.size(), value);
    return text;
}

}  // namespace

std::string make_instruction(InstructionMode mode, const std::string& class_name,
                             const std::string& room_label, uint32_t variant) {
    if (class_index(default_class_vocabulary(), class_name) < 0)
        throw InvalidArgument("make_instruction: unknown class " + class_name);
    const auto& verbs = verbs_for_class(class_name);
    const std::string& verb = verbs[variant % verbs.size()];
    if (mode == InstructionMode::TemplateObj) return verb + " the " + class_name;

    if (room_label.empty())
        throw InvalidArgument("make_instruction: sentence mode needs a room label");
    const auto& skeletons = sentence_templates();
    std::string text = skeletons[variant % skeletons.size()];
    text = replace_slot(text, "{room}", room_label);
    text = replace_slot(text, "{verb}", verb);
    text = replace_slot(text, "{object}", class_name);
    return text;
}

}  // namespace vlnforge
