#pragma once

// Minimal element tree over Expat. Only what the corpus, ontology and
// generator formats need: elements, ordered attributes and positions.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ritual::xml {

using Attributes = std::vector<std::pair<std::string, std::string>>;

struct Element {
    std::string name;
    Attributes attributes;
    std::vector<Element> children;
    int line = 0;
    int column = 0;

    const std::string* attr(std::string_view key) const;
    void set(std::string key, std::string value);
    Element& add(std::string child_name);
    std::string where() const;
};

/// Throws ParseError with the Expat line/column on malformed input.
Element parse(std::string_view bytes, const std::string& source);

/// UTF-8 document with prolog, two-space indentation, one element per line.
std::string serialize(const Element& root);

} // namespace ritual::xml
