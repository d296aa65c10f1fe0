#include "vlnforge/vocab.hpp"

#include <map>

namespace vlnforge {

const std::vector<std::string>& default_class_vocabulary() {
    static const std::vector<std::string> vocab = {
        "void",        // 0
        "wall",        // 1
        "floor",       // 2
        "ceiling",     // 3
        "chair",       // 4
        "table",       // 5
        "sofa",        // 6
        "bed",         // 7
        "cabinet",     // 8
        "shelf",       // 9
        "lamp",        // 10
        "mirror",      // 11
        "desk",        // 12
        "wardrobe",    // 13
        "window",      // 14
        "door",        // 15
        "toilet",      // 16
        "sink",        // 17
        "bathtub",     // 18
        "refrigerator",// 19
        "oven",        // 20
        "microwave",   // 21
        "television",  // 22
        "plant",       // 23
        "pillow",      // 24
        "curtain",     // 25
        "rug",         // 26
        "chandelier",  // 27
        "stool",       // 28
        "bench",       // 29
        "bookshelf",   // 30
        "counter",     // 31
        "dresser",     // 32
        "nightstand",  // 33
        "armchair",    // 34
        "fireplace",   // 35
        "washer",      // 36
        "piano",       // 37
        "painting",    // 38
        "vase",        // 39
        "basket",      // 40
    };
    return vocab;
}

const std::vector<uint16_t>& default_stuff_classes() {
    static const std::vector<uint16_t> stuff = {0, 1, 2, 3};
    return stuff;
}

const std::vector<std::string>& room_types() {
    static const std::vector<std::string> rooms = {
        "bedroom", "kitchen", "living room", "bathroom", "office", "hallway", "dining room",
    };
    return rooms;
}

int class_index(const std::vector<std::string>& vocab, const std::string& name) {
    for (size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i] == name) return int(i);
    return -1;
}

const std::vector<std::string>& verbs_for_class(const std::string& class_name) {
    static const std::map<std::string, std::vector<std::string>> bank = {
        {"chair", {"move", "check", "dust"}},
        {"table", {"clean", "check", "dust"}},
        {"sofa", {"clean", "check", "fluff"}},
        {"bed", {"make", "check", "clean"}},
        {"cabinet", {"open", "close", "check"}},
        {"shelf", {"dust", "check", "tidy"}},
        {"lamp", {"turn on", "check", "dust"}},
        {"mirror", {"clean", "check", "polish"}},
        {"desk", {"clean", "tidy", "check"}},
        {"wardrobe", {"open", "close", "check"}},
        {"window", {"open", "close", "clean"}},
        {"door", {"open", "close", "check"}},
        {"toilet", {"clean", "check", "flush"}},
        {"sink", {"clean", "check", "rinse"}},
        {"bathtub", {"clean", "check", "rinse"}},
        {"refrigerator", {"open", "close", "check"}},
        {"oven", {"open", "check", "clean"}},
        {"microwave", {"open", "check", "clean"}},
        {"television", {"turn on", "check", "dust"}},
        {"plant", {"water", "check", "move"}},
        {"pillow", {"fluff", "move", "check"}},
        {"curtain", {"open", "close", "check"}},
        {"rug", {"clean", "check", "move"}},
        {"chandelier", {"clean", "dust", "check"}},
        {"stool", {"move", "check", "dust"}},
        {"bench", {"move", "check", "dust"}},
        {"bookshelf", {"dust", "tidy", "check"}},
        {"counter", {"clean", "check", "wipe"}},
        {"dresser", {"open", "check", "dust"}},
        {"nightstand", {"dust", "check", "tidy"}},
        {"armchair", {"move", "check", "clean"}},
        {"fireplace", {"clean", "check", "inspect"}},
        {"washer", {"open", "check", "run"}},
        {"piano", {"dust", "check", "play"}},
        {"painting", {"straighten", "dust", "check"}},
        {"vase", {"move", "check", "dust"}},
        {"basket", {"move", "check", "empty"}},
    };
    static const std::vector<std::string> fallback = {"find", "check", "inspect"};
    const auto it = bank.find(class_name);
    return it != bank.end() ? it->second : fallback;
}

const std::vector<std::string>& sentence_templates() {
    static const std::vector<std::string> templates = {
        "go to {room} and {verb} the {object}",
        "walk to {room} and {verb} the {object}",
        "head to {room} then {verb} the {object}",
        "proceed to {room} and {verb} the {object} there",
    };
    return templates;
}

const SizePrior& size_prior(const std::string& class_name) {
    using M = SizePrior::Mount;
    static const std::map<std::string, SizePrior> priors = {
        {"chair", {0.22, 0.35, 0.6, 1.0, M::Floor}},
        {"table", {0.25, 0.38, 0.6, 0.9, M::Floor}},
        {"sofa", {0.25, 0.38, 0.6, 0.9, M::Floor}},
        {"bed", {0.25, 0.38, 0.5, 0.8, M::Floor}},
        {"cabinet", {0.22, 0.35, 0.7, 1.15, M::Floor}},
        {"shelf", {0.25, 0.45, 0.2, 0.4, M::Wall}},
        {"lamp", {0.2, 0.32, 0.7, 1.2, M::Floor}},
        {"mirror", {0.3, 0.6, 0.4, 0.8, M::Wall}},
        {"desk", {0.25, 0.38, 0.6, 0.9, M::Floor}},
        {"wardrobe", {0.25, 0.38, 0.8, 1.25, M::Floor}},
        {"window", {0.35, 0.7, 0.4, 0.9, M::Wall}},
        {"toilet", {0.22, 0.35, 0.5, 0.8, M::Floor}},
        {"sink", {0.2, 0.32, 0.6, 0.9, M::Floor}},
        {"bathtub", {0.25, 0.38, 0.45, 0.65, M::Floor}},
        {"refrigerator", {0.25, 0.38, 0.9, 1.25, M::Floor}},
        {"oven", {0.25, 0.38, 0.6, 0.9, M::Floor}},
        {"microwave", {0.2, 0.32, 0.35, 0.5, M::Floor}},
        {"television", {0.35, 0.7, 0.3, 0.6, M::Wall}},
        {"plant", {0.2, 0.32, 0.6, 1.2, M::Floor}},
        {"pillow", {0.2, 0.32, 0.3, 0.45, M::Floor}},
        {"curtain", {0.35, 0.7, 0.5, 1.0, M::Wall}},
        {"rug", {0.25, 0.38, 0.25, 0.4, M::Floor}},
        {"chandelier", {0.25, 0.45, 0.25, 0.5, M::Ceiling}},
        {"stool", {0.2, 0.32, 0.45, 0.7, M::Floor}},
        {"bench", {0.25, 0.38, 0.4, 0.6, M::Floor}},
        {"bookshelf", {0.25, 0.38, 0.8, 1.2, M::Floor}},
        {"counter", {0.25, 0.38, 0.7, 1.0, M::Floor}},
        {"dresser", {0.25, 0.38, 0.7, 1.0, M::Floor}},
        {"nightstand", {0.22, 0.35, 0.5, 0.7, M::Floor}},
        {"armchair", {0.25, 0.38, 0.6, 0.9, M::Floor}},
        {"fireplace", {0.25, 0.38, 0.7, 1.1, M::Floor}},
        {"washer", {0.25, 0.38, 0.6, 0.9, M::Floor}},
        {"piano", {0.25, 0.38, 0.8, 1.1, M::Floor}},
        {"painting", {0.3, 0.6, 0.3, 0.7, M::Wall}},
        {"vase", {0.2, 0.3, 0.35, 0.6, M::Floor}},
        {"basket", {0.2, 0.32, 0.3, 0.5, M::Floor}},
        {"door", {0.35, 0.6, 0.8, 1.2, M::Wall}},
    };
    const auto it = priors.find(class_name);
    if (it == priors.end()) throw InvalidArgument("no size prior for class: " + class_name);
    return it->second;
}

}  // namespace vlnforge
