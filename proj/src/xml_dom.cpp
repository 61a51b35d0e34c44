#include "xml_dom.hpp"

#include <expat.h>

#include <memory>

#include "ritual/error.hpp"

namespace ritual::xml {

const std::string* Element::attr(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
        if (k == key) return &v;
    }
    return nullptr;
}

void Element::set(std::string key, std::string value) {
    for (auto& [k, v] : attributes) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    attributes.emplace_back(std::move(key), std::move(value));
}

Element& Element::add(std::string child_name) {
    children.push_back(Element{std::move(child_name), {}, {}, 0, 0});
    return children.back();
}

std::string Element::where() const {
    return "<" + name + "> at line " + std::to_string(line) + ", column " + std::to_string(column);
}

namespace {

struct Builder {
    XML_Parser parser = nullptr;
    std::vector<Element*> stack;
    Element root;
    bool have_root = false;
};

void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(data);
    Element el;
    el.name = name;
    el.line = static_cast<int>(XML_GetCurrentLineNumber(b->parser));
    el.column = static_cast<int>(XML_GetCurrentColumnNumber(b->parser)) + 1;
    for (int i = 0; attrs[i] != nullptr; i += 2) {
        el.attributes.emplace_back(attrs[i], attrs[i + 1]);
    }
    if (b->stack.empty()) {
        b->root = std::move(el);
        b->have_root = true;
        b->stack.push_back(&b->root);
    } else {
        Element* parent = b->stack.back();
        parent->children.push_back(std::move(el));
        b->stack.push_back(&parent->children.back());
    }
}

void on_end(void* data, const XML_Char*) {
    static_cast<Builder*>(data)->stack.pop_back();
}

void escape_into(std::string& out, std::string_view s) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\n': out += "&#10;"; break;
        case '\t': out += "&#9;"; break;
        default: out += c;
        }
    }
}

void write(std::string& out, const Element& el, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += '<';
    out += el.name;
    for (const auto& [k, v] : el.attributes) {
        out += ' ';
        out += k;
        out += "=\"";
        escape_into(out, v);
        out += '"';
    }
    if (el.children.empty()) {
        out += " />\n";
        return;
    }
    out += ">\n";
    for (const auto& child : el.children) write(out, child, depth + 1);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</";
    out += el.name;
    out += ">\n";
}

} // namespace

Element parse(std::string_view bytes, const std::string& source) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                        &XML_ParserFree);
    if (!parser) throw Error("cannot allocate XML parser");

    // Element pointers on the stack stay valid because a parent's children
    // vector only grows while that parent is the innermost open element.
    Builder b;
    b.parser = parser.get();
    XML_SetUserData(parser.get(), &b);
    XML_SetElementHandler(parser.get(), &on_start, &on_end);

    if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) ==
        XML_STATUS_ERROR) {
        throw ParseError(source, static_cast<int>(XML_GetCurrentLineNumber(parser.get())),
                         static_cast<int>(XML_GetCurrentColumnNumber(parser.get())) + 1,
                         XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
    if (!b.have_root) throw ParseError(source, 1, 1, "no root element");
    return std::move(b.root);
}

std::string serialize(const Element& root) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    write(out, root, 0);
    return out;
}

} // namespace ritual::xml
