#pragma once

#include "bindbench/scaffold.hpp"
#include "bindbench/scene.hpp"

#include <map>
#include <string>

namespace bindbench {

// Experimental arm: a scaffold variant paired with a prompt template.
enum class Condition { simple, ours, ours_nonum, column, grid, cot };

std::string condition_name(Condition c);
Condition condition_from_name(const std::string& name);

// The image-side half of each condition.
ScaffoldVariant condition_scaffold_variant(Condition c);

// Single user message: instruction prefix plus task question.
struct PromptText {
    std::string text;
    bool operator==(const PromptText&) const = default;
};

using PromptMetadata = std::map<std::string, std::string>;

// Loads the plain-text templates `<task>.<condition>.txt` from a resource
// directory and instantiates them. Templates are audit-friendly files;
// leading '#' lines are headers and are stripped.
class PromptLibrary {
public:
    // fix_grammar rewrites the intentionally irregular "lines exists"
    // phrasing into standard English.
    explicit PromptLibrary(const std::string& prompt_dir, bool fix_grammar = false);

    PromptText build_prompt(Task task, Condition condition, const PromptMetadata& metadata) const;

    // Metadata fields for a generated instance (target names, option labels).
    static PromptMetadata metadata_for(const TaskInstance& inst);

    const std::string& raw_template(Task task, Condition condition) const;

private:
    std::map<std::string, std::string> templates_; // key "<task>.<condition>"
    bool fix_grammar_ = false;
};

// Default resource root: $BINDBENCH_RESOURCES, else the path compiled in
// from the source tree.
std::string default_resource_dir();

} // namespace bindbench
