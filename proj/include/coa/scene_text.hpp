#ifndef COA_SCENE_TEXT_HPP
#define COA_SCENE_TEXT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "coa/world.hpp"

namespace coa {

struct SceneEntityEntry {
    std::string id;
    std::string category;
    std::string region;  // "held" for carried entities
    std::string affordance_summary;
};

struct SceneRelation {
    std::string subject;
    std::string relation;  // in / on / near / left_of / right_of
    std::string object;
};

struct SceneDescription {
    std::string text;
    std::vector<SceneEntityEntry> entities;
    std::vector<SceneRelation> relations;
};

// Deterministic template rendering of an Observation. Stands in for the
// vision-language captioner; every visible entity id appears verbatim in
// the text so a text-only backend can refer to it.
SceneDescription describe_scene(const Observation& obs);

// Lateral distance threshold for the "near" relation, meters.
inline constexpr double kNearThreshold = 0.75;

struct TokenSeq {
    std::vector<std::uint32_t> tokens;
    std::size_t length = 0;
};

// Reversible tokenizer: ids 0..255 are raw bytes, 256+i is the i-th vocab
// word. Tokenization is greedy longest-match, so detokenize(tokenize(x))
// == x for every input.
class Tokenizer {
  public:
    explicit Tokenizer(std::vector<std::string> vocab);
    static Tokenizer with_default_vocab();
    static Tokenizer from_file(const std::string& path);  // one word per line

    TokenSeq tokenize(const std::string& text) const;
    std::string detokenize(const TokenSeq& seq) const;  // throws UnknownToken
    std::size_t vocab_size() const { return vocab_.size(); }

  private:
    std::vector<std::string> vocab_;
};

}  // namespace coa

#endif
