#include "bindbench/parsing.hpp"

#include "bindbench/common.hpp"
#include "bindbench/image.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace bindbench {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// All [..] spans, shortest-first, in order of appearance.
std::vector<std::string> bracketed_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string::npos) {
        std::size_t end = text.find(']', pos + 1);
        if (end == std::string::npos) break;
        out.push_back(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return out;
}

// Words: runs of letters/digits plus inner '-' and '_'.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_') {
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::optional<bool> bool_word(const std::string& word) {
    std::string w = lower(word);
    if (w == "true" || w == "yes") return true;
    if (w == "false" || w == "no") return false;
    return std::nullopt;
}

std::optional<int> full_integer(const std::string& s) {
    std::string t = trim(s);
    if (t.empty() || t.size() > 9) return std::nullopt;
    for (unsigned char c : t)
        if (!std::isdigit(c)) return std::nullopt;
    return std::stoi(t);
}

bool is_bulleted(const std::string& line) {
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) return false;
    char c = line[i];
    if (c == '-' || c == '*' || c == '+') return true;
    if (std::isdigit(static_cast<unsigned char>(c))) {
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        return i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':');
    }
    return false;
}

std::string strip_plural(const std::string& token) {
    if (token.size() > 3 && token.compare(token.size() - 2, 2, "es") == 0)
        return token.substr(0, token.size() - 2);
    if (token.size() > 2 && token.back() == 's') return token.substr(0, token.size() - 1);
    return token;
}

} // namespace

std::string parse_status_name(ParseStatus s) {
    switch (s) {
        case ParseStatus::strict: return "strict";
        case ParseStatus::fallback: return "fallback";
        case ParseStatus::failed: return "failed";
    }
    return "failed";
}

ParseStatus parse_status_from_name(const std::string& name) {
    if (name == "strict") return ParseStatus::strict;
    if (name == "fallback") return ParseStatus::fallback;
    if (name == "failed") return ParseStatus::failed;
    throw IoError("unknown parse status: " + name);
}

SynonymTable SynonymTable::load(const std::string& tsv_path) {
    SynonymTable table;
    std::istringstream in(read_file(tsv_path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw IoError("synonyms.tsv:" + std::to_string(line_no) + ": expected <token>\\t<canonical>");
        std::string token = lower(trim(line.substr(0, tab)));
        std::string canonical = trim(line.substr(tab + 1));
        if (token.empty() || canonical.empty())
            throw IoError("synonyms.tsv:" + std::to_string(line_no) + ": empty field");
        bool mapped = false;
        for (int i = 0; i < kShapeCount; ++i)
            if (canonical == shape_name(static_cast<Shape>(i))) {
                table.shapes_[token] = static_cast<Shape>(i);
                mapped = true;
            }
        for (int i = 0; i < kColorCount; ++i)
            if (canonical == color_name(static_cast<Color>(i))) {
                table.colors_[token] = static_cast<Color>(i);
                mapped = true;
            }
        if (!mapped)
            throw IoError("synonyms.tsv:" + std::to_string(line_no) + ": unknown canonical '" +
                          canonical + "'");
    }
    return table;
}

std::optional<Shape> SynonymTable::shape_lookup(const std::string& token) const {
    auto it = shapes_.find(token);
    if (it == shapes_.end()) return std::nullopt;
    return it->second;
}

std::optional<Color> SynonymTable::color_lookup(const std::string& token) const {
    auto it = colors_.find(token);
    if (it == colors_.end()) return std::nullopt;
    return it->second;
}

std::optional<Shape> SynonymTable::shape_for(const std::string& token) const {
    std::string t = lower(token);
    if (auto s = shape_lookup(t)) return s;
    return shape_lookup(strip_plural(t));
}

std::optional<Color> SynonymTable::color_for(const std::string& token) const {
    std::string t = lower(token);
    if (auto c = color_lookup(t)) return c;
    return color_lookup(strip_plural(t));
}

ParsedAnswer parse_bool(const std::string& text) {
    ParsedAnswer ans;
    for (const auto& tok : bracketed_tokens(text)) {
        if (auto v = bool_word(trim(tok))) {
            ans.status = ParseStatus::strict; // last bracketed bool wins
            ans.boolean = v;
        }
    }
    if (ans.status == ParseStatus::strict) return ans;
    for (const auto& word : tokenize(text)) {
        if (auto v = bool_word(word)) {
            ans.status = ParseStatus::fallback;
            ans.boolean = v;
        }
    }
    return ans;
}

ParsedAnswer parse_count(const std::string& text) {
    ParsedAnswer ans;
    for (const auto& tok : bracketed_tokens(text)) {
        if (auto v = full_integer(tok)) {
            ans.status = ParseStatus::strict;
            ans.count = v;
        }
    }
    if (ans.status == ParseStatus::strict) return ans;
    // Fallback: the last integer token in the final non-empty line.
    std::istringstream in(text);
    std::string line, last_line;
    while (std::getline(in, line))
        if (!trim(line).empty()) last_line = line;
    for (const auto& word : tokenize(last_line)) {
        if (auto v = full_integer(word)) {
            ans.status = ParseStatus::fallback;
            ans.count = v;
        }
    }
    return ans;
}

ParsedAnswer parse_object_list(const std::string& text, const SynonymTable& synonyms) {
    ParsedAnswer ans;
    bool any_structured = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        bool structured = is_bulleted(line) || line.find('[') != std::string::npos;
        auto tokens = tokenize(line);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            auto color = synonyms.color_for(tokens[i]);
            if (!color) continue;
            // A color token opens a pair; the shape may sit a token away
            // ("red large circle").
            bool matched = false;
            for (std::size_t j = i + 1; j < std::min(tokens.size(), i + 3); ++j) {
                if (auto shape = synonyms.shape_for(tokens[j])) {
                    ans.objects.push_back({*shape, *color});
                    if (structured) any_structured = true;
                    i = j; // resume after the shape token
                    matched = true;
                    break;
                }
            }
            if (!matched && i + 1 < tokens.size() && !synonyms.color_for(tokens[i + 1]))
                ans.unknown_tokens.push_back(tokens[i + 1]);
        }
    }
    if (ans.objects.empty()) {
        ans.status = ParseStatus::failed;
    } else {
        ans.status = any_structured ? ParseStatus::strict : ParseStatus::fallback;
    }
    return ans;
}

ParsedAnswer parse_choice(const std::string& text, int n_options,
                          const std::vector<std::string>& option_texts) {
    ParsedAnswer ans;
    auto letter_index = [&](const std::string& tok) -> std::optional<int> {
        if (tok.size() != 1) return std::nullopt;
        char c = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
        if (c < 'A' || c >= 'A' + n_options) return std::nullopt;
        return c - 'A';
    };
    for (const auto& tok : bracketed_tokens(text)) {
        if (auto idx = letter_index(trim(tok))) {
            ans.status = ParseStatus::strict;
            ans.choice = idx;
        }
    }
    if (ans.status == ParseStatus::strict) return ans;

    // Fallback: the later of (a) the last standalone option letter and
    // (b) the last verbatim option text occurrence.
    std::string low = lower(text);
    std::size_t best_pos = std::string::npos;
    std::optional<int> best;
    std::size_t scan = 0;
    for (const auto& word : tokenize(text)) {
        std::size_t at = low.find(lower(word), scan);
        if (at == std::string::npos) at = scan;
        scan = at + word.size();
        if (auto idx = letter_index(word)) {
            if (best_pos == std::string::npos || at >= best_pos) {
                best_pos = at;
                best = idx;
            }
        }
    }
    for (int i = 0; i < n_options && i < static_cast<int>(option_texts.size()); ++i) {
        std::string needle = lower(option_texts[i]);
        if (needle.empty()) continue;
        std::size_t pos = low.rfind(needle);
        if (pos != std::string::npos && (best_pos == std::string::npos || pos >= best_pos)) {
            best_pos = pos;
            best = i;
        }
    }
    if (best) {
        ans.status = ParseStatus::fallback;
        ans.choice = best;
    }
    return ans;
}

ParsedAnswer parse_answer(Task task, const std::string& text, const SynonymTable& synonyms) {
    switch (task) {
        case Task::search: return parse_bool(text);
        case Task::count: return parse_count(text);
        case Task::describe: return parse_object_list(text, synonyms);
        case Task::spatial: return parse_choice(text);
    }
    return {};
}

} // namespace bindbench
