#include "bindbench/prompting.hpp"

#include "bindbench/common.hpp"
#include "bindbench/image.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace bindbench {

namespace {

const char* kConditionNames[] = {"simple", "ours", "ours_nonum", "column", "grid", "cot"};

std::string strip_header(const std::string& raw) {
    std::istringstream in(raw);
    std::string line, out;
    bool in_header = true;
    while (std::getline(in, line)) {
        if (in_header && (line.empty() || line[0] == '#')) continue;
        in_header = false;
        out += line;
        out += '\n';
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

std::string substitute(const std::string& tmpl, const PromptMetadata& meta) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] != '{') {
            out += tmpl[i++];
            continue;
        }
        std::size_t end = tmpl.find('}', i);
        if (end == std::string::npos) throw TemplateError("unterminated placeholder in template");
        std::string key = tmpl.substr(i + 1, end - i - 1);
        auto it = meta.find(key);
        if (it == meta.end()) throw TemplateError("missing metadata field: " + key);
        out += it->second;
        i = end + 1;
    }
    return out;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

} // namespace

std::string condition_name(Condition c) { return kConditionNames[static_cast<int>(c)]; }

Condition condition_from_name(const std::string& name) {
    for (int i = 0; i < 6; ++i)
        if (name == kConditionNames[i]) return static_cast<Condition>(i);
    throw IoError("unknown condition: " + name);
}

ScaffoldVariant condition_scaffold_variant(Condition c) {
    switch (c) {
        case Condition::ours: return ScaffoldVariant::rows;
        case Condition::ours_nonum: return ScaffoldVariant::rows_nonum;
        case Condition::column: return ScaffoldVariant::columns;
        case Condition::grid: return ScaffoldVariant::grid;
        case Condition::simple:
        case Condition::cot: return ScaffoldVariant::none;
    }
    return ScaffoldVariant::none;
}

PromptLibrary::PromptLibrary(const std::string& prompt_dir, bool fix_grammar)
    : fix_grammar_(fix_grammar) {
    for (int t = 0; t < 4; ++t) {
        for (int c = 0; c < 6; ++c) {
            std::string key = task_name(static_cast<Task>(t)) + "." + kConditionNames[c];
            auto path = std::filesystem::path(prompt_dir) / (key + ".txt");
            std::string raw;
            try {
                raw = read_file(path.string());
            } catch (const IoError&) {
                throw TemplateError("missing prompt template: " + path.string());
            }
            std::string body = strip_header(raw);
            if (body.empty()) throw TemplateError("empty prompt template: " + path.string());
            templates_[key] = body;
        }
    }
}

const std::string& PromptLibrary::raw_template(Task task, Condition condition) const {
    return templates_.at(task_name(task) + "." + condition_name(condition));
}

PromptText PromptLibrary::build_prompt(Task task, Condition condition,
                                       const PromptMetadata& metadata) const {
    std::string text = substitute(raw_template(task, condition), metadata);
    if (fix_grammar_) replace_all(text, "horizontal lines exists", "horizontal lines that exist");
    if (fix_grammar_) replace_all(text, "vertical lines exists", "vertical lines that exist");
    if (fix_grammar_) replace_all(text, "grid lines exists", "grid lines that exist");
    return PromptText{std::move(text)};
}

PromptMetadata PromptLibrary::metadata_for(const TaskInstance& inst) {
    PromptMetadata meta;
    switch (inst.task) {
        case Task::search: {
            const auto& t = std::get<SearchTruth>(inst.truth);
            meta["target"] = color_name(t.target.color) + " " + shape_word(t.target.shape);
            break;
        }
        case Task::count: {
            const auto& t = std::get<CountTruth>(inst.truth);
            meta["targets"] = color_name(t.target.color) + " " + shape_plural(t.target.shape);
            break;
        }
        case Task::describe:
            break;
        case Task::spatial: {
            const auto& t = std::get<SpatialTruth>(inst.truth);
            meta["target_a"] = color_name(t.a.color) + " " + shape_word(t.a.shape);
            meta["target_b"] = color_name(t.b.color) + " " + shape_word(t.b.shape);
            break;
        }
    }
    // Externally ingested instances may override the derived names.
    for (const char* key : {"target", "targets", "target_a", "target_b"}) {
        if (inst.params.contains(key) && inst.params[key].is_string())
            meta[key] = inst.params[key].get<std::string>();
    }
    return meta;
}

std::string default_resource_dir() {
    if (const char* env = std::getenv("BINDBENCH_RESOURCES"); env && *env) return env;
#ifdef BINDBENCH_SOURCE_RESOURCES
    return BINDBENCH_SOURCE_RESOURCES;
#else
    return "resources";
#endif
}

} // namespace bindbench
