#pragma once

#include "bindbench/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bindbench {

enum class ParseStatus { strict, fallback, failed };

std::string parse_status_name(ParseStatus s);
ParseStatus parse_status_from_name(const std::string& name);

// Structured reading of one model response. Exactly one payload is set on
// success; failed answers carry none.
struct ParsedAnswer {
    ParseStatus status = ParseStatus::failed;
    std::optional<bool> boolean;                // search
    std::optional<int> count;                   // count
    std::vector<Feature> objects;               // describe (multiset)
    std::optional<int> choice;                  // spatial, 0-based
    std::vector<std::string> unknown_tokens;    // describe tokens outside the vocabulary
};

// Token -> canonical shape/color vocabulary, loaded from a versioned TSV so
// normalization rules stay auditable.
class SynonymTable {
public:
    static SynonymTable load(const std::string& tsv_path);

    std::optional<Shape> shape_for(const std::string& token) const;
    std::optional<Color> color_for(const std::string& token) const;

private:
    std::optional<Shape> shape_lookup(const std::string& token) const;
    std::optional<Color> color_lookup(const std::string& token) const;

    std::map<std::string, Shape> shapes_;
    std::map<std::string, Color> colors_;
};

// All parsers are total: they never throw on arbitrary input.
// Strict reads the last bracketed answer token; fallback scrapes prose.
ParsedAnswer parse_bool(const std::string& text);
ParsedAnswer parse_count(const std::string& text);
ParsedAnswer parse_object_list(const std::string& text, const SynonymTable& synonyms);
ParsedAnswer parse_choice(const std::string& text, int n_options = 4,
                          const std::vector<std::string>& option_texts = {
                              kSpatialOptions.begin(), kSpatialOptions.end()});

ParsedAnswer parse_answer(Task task, const std::string& text, const SynonymTable& synonyms);

} // namespace bindbench
