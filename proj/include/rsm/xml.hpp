#pragma once

// Minimal XML subset: elements and attributes only. No mixed content,
// namespaces, CDATA, or DTDs; an optional leading <?xml ...?> declaration
// and comments are skipped. Every on-disk format in this project fits the
// subset, and owning the writer keeps serialized output byte-stable.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rsm {

struct XmlError : std::runtime_error {
    size_t offset;
    XmlError(const std::string& msg, size_t off);
};

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;  // document order
    std::vector<XmlNode> children;

    const std::string* find_attr(const std::string& key) const;
    const std::string& attr(const std::string& key) const;  // throws XmlError if absent
    std::string attr_or(const std::string& key, std::string dflt) const;

    XmlNode() = default;
    explicit XmlNode(std::string n) : name(std::move(n)) {}
    XmlNode& add_attr(std::string key, std::string value);
    XmlNode& add_child(XmlNode child);
};

XmlNode xml_parse(const std::string& text);

// Canonical form: UTF-8 declaration header, 2-space indent, attributes in
// stored order, self-closing tags for childless elements, LF line endings.
std::string xml_write(const XmlNode& root);

std::string xml_escape(const std::string& s);

}  // namespace rsm
