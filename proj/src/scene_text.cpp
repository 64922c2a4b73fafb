#include "coa/scene_text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "coa/errors.hpp"

namespace coa {

namespace {

std::string short_num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string affordance_summary(const AffordanceVector& a) {
    return "size=" + short_num(a.size) + " weight=" + short_num(a.weight) + " rigidity=" +
           short_num(a.rigidity) + " movability=" + short_num(a.movability) + " actionability=" +
           short_num(a.actionability);
}

const Region* region_of(const Observation& obs, const std::string& id) {
    for (const auto& r : obs.visible_regions)
        if (r.id == id) return &r;
    return nullptr;
}

Vec2 entity_pos(const Observation& obs, const Entity& e) {
    if (e.is_held()) return obs.robot.pos;
    const Region* r = region_of(obs, e.region);
    return r ? r->center : obs.robot.pos;
}

}  // namespace

SceneDescription describe_scene(const Observation& obs) {
    SceneDescription d;
    if (obs.visible_entities.empty() && obs.visible_regions.empty()) {
        d.text = "The area appears empty.";
        return d;
    }

    std::string text;
    for (const auto& e : obs.visible_entities) {
        SceneEntityEntry entry;
        entry.id = e.id;
        entry.category = e.category;
        entry.affordance_summary = affordance_summary(e.affordance);
        if (e.is_held()) {
            entry.region = "held";
            text += "A " + e.category + " (" + e.id + ") is held in the " +
                    hand_name(*e.held_in) + " hand. ";
        } else {
            entry.region = e.region;
            text += "A " + e.category + " (" + e.id + ") is in " + e.region + ". ";
            d.relations.push_back({e.id, "in", e.region});
        }
        d.entities.push_back(std::move(entry));
    }
    for (const auto& r : obs.visible_regions) {
        if (!r.container) continue;
        text += "The " + r.id + " is " + (r.open ? "open" : "closed") + ". ";
    }
    if (obs.visible_entities.empty()) text += "No objects are visible. ";

    // Pairwise geometric relations between non-held entities.
    const Vec2 hd = heading_dir(obs.robot.heading);
    for (size_t i = 0; i < obs.visible_entities.size(); ++i) {
        for (size_t j = i + 1; j < obs.visible_entities.size(); ++j) {
            const Entity& a = obs.visible_entities[i];
            const Entity& b = obs.visible_entities[j];
            if (a.is_held() || b.is_held()) continue;
            Vec2 pa = entity_pos(obs, a), pb = entity_pos(obs, b);
            if ((pa - pb).norm() <= kNearThreshold) d.relations.push_back({a.id, "near", b.id});
            double lat_a = cross(hd, pa - obs.robot.pos);
            double lat_b = cross(hd, pb - obs.robot.pos);
            if (lat_a > lat_b + 0.1) d.relations.push_back({a.id, "left_of", b.id});
            else if (lat_a < lat_b - 0.1) d.relations.push_back({a.id, "right_of", b.id});
        }
    }
    if (!text.empty() && text.back() == ' ') text.pop_back();
    d.text = std::move(text);
    return d;
}

namespace {

// Fixed word list; kept in sync with data/vocab.txt.
const char* kDefaultVocab[] = {
    " ", "the", "a", "an", "is", "in", "on", "near", "held", "hand", "open", "closed",
    "left", "right", "both", "and", "to", "of", "it", "up", "down", "into", "onto", "from",
    "pick", "place", "put", "take", "bring", "carry", "walk", "go", "find", "locate", "search",
    "grasp", "lift", "raise", "move", "rotate", "stop", "release", "hold", "rearrange",
    "cup", "bottle", "box", "book", "ball", "plate", "toy", "bag", "can",
    "table", "counter", "shelf", "sofa", "bed", "cabinet", "refrigerator", "kitchen",
    "white", "red", "blue", "green", "small", "large", "heavy", "light",
    "robot", "object", "objects", "region", "area", "room", "appears", "empty",
    "size", "weight", "rigidity", "movability", "actionability", "visible", "no",
    "then", "front", "behind", "next", "." , ",", "(", ")", "=", "_",
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
};

}  // namespace

Tokenizer::Tokenizer(std::vector<std::string> vocab) : vocab_(std::move(vocab)) {}

Tokenizer Tokenizer::with_default_vocab() {
    std::vector<std::string> v;
    for (const char* w : kDefaultVocab) v.emplace_back(w);
    return Tokenizer(std::move(v));
}

Tokenizer Tokenizer::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file: " + path);
    std::vector<std::string> v;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "<space>") line = " ";  // file-format escape for the space token
        v.push_back(line);
    }
    return Tokenizer(std::move(v));
}

TokenSeq Tokenizer::tokenize(const std::string& text) const {
    TokenSeq seq;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t best_len = 0;
        size_t best_id = 0;
        for (size_t i = 0; i < vocab_.size(); ++i) {
            const std::string& w = vocab_[i];
            if (w.empty() || w.size() <= best_len) continue;
            if (text.compare(pos, w.size(), w) == 0) {
                best_len = w.size();
                best_id = i;
            }
        }
        if (best_len > 0) {
            seq.tokens.push_back(static_cast<std::uint32_t>(256 + best_id));
            pos += best_len;
        } else {
            seq.tokens.push_back(static_cast<std::uint32_t>(static_cast<unsigned char>(text[pos])));
            ++pos;
        }
    }
    seq.length = seq.tokens.size();
    return seq;
}

std::string Tokenizer::detokenize(const TokenSeq& seq) const {
    std::string out;
    for (std::uint32_t t : seq.tokens) {
        if (t < 256) {
            out.push_back(static_cast<char>(static_cast<unsigned char>(t)));
        } else if (t - 256 < vocab_.size()) {
            out += vocab_[t - 256];
        } else {
            throw UnknownToken("token id out of range: " + std::to_string(t));
        }
    }
    return out;
}

}  // namespace coa
