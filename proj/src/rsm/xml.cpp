#include "rsm/xml.hpp"

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>

namespace rsm {

XmlError::XmlError(const std::string& msg, size_t off)
    : std::runtime_error(msg + " (offset " + std::to_string(off) + ")"), offset(off) {}

const std::string* XmlNode::find_attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
        if (k == key) return &v;
    return nullptr;
}

const std::string& XmlNode::attr(const std::string& key) const {
    if (const std::string* v = find_attr(key)) return *v;
    throw XmlError("missing attribute '" + key + "' on <" + name + ">", 0);
}

std::string XmlNode::attr_or(const std::string& key, std::string dflt) const {
    const std::string* v = find_attr(key);
    return v ? *v : std::move(dflt);
}

XmlNode& XmlNode::add_attr(std::string key, std::string value) {
    attrs.emplace_back(std::move(key), std::move(value));
    return *this;
}

XmlNode& XmlNode::add_child(XmlNode child) {
    children.push_back(std::move(child));
    return *this;
}

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

struct Parser {
    const std::string& text;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw XmlError(msg, pos); }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return eof() ? '\0' : text[pos]; }
    bool starts_with(const char* s) const { return text.compare(pos, std::strlen(s), s) == 0; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
    }

    // Whitespace, comments, and <?...?> declarations carry no content here.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                size_t end = text.find("-->", pos + 4);
                if (end == std::string::npos) fail("unterminated comment");
                pos = end + 3;
            } else if (starts_with("<?")) {
                size_t end = text.find("?>", pos + 2);
                if (end == std::string::npos) fail("unterminated declaration");
                pos = end + 2;
            } else {
                return;
            }
        }
    }

    std::string name_token() {
        size_t start = pos;
        while (!eof() && is_name_char(text[pos])) pos++;
        if (pos == start) fail("expected a name");
        return text.substr(start, pos - start);
    }

    std::string decode(const std::string& raw) {
        std::string out;
        out.reserve(raw.size());
        for (size_t i = 0; i < raw.size();) {
            if (raw[i] != '&') {
                out += raw[i++];
                continue;
            }
            size_t semi = raw.find(';', i);
            if (semi == std::string::npos) fail("unterminated entity");
            std::string ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") {
                out += '&';
            } else if (ent == "lt") {
                out += '<';
            } else if (ent == "gt") {
                out += '>';
            } else if (ent == "quot") {
                out += '"';
            } else if (ent == "apos") {
                out += '\'';
            } else if (!ent.empty() && ent[0] == '#') {
                int base = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X') ? 16 : 10;
                const char* digits = ent.c_str() + (base == 16 ? 2 : 1);
                char* endp = nullptr;
                long code = std::strtol(digits, &endp, base);
                if (endp == digits || *endp != '\0' || code <= 0 || code > 0x10FFFF)
                    fail("bad character reference '&" + ent + ";'");
                append_utf8(out, static_cast<uint32_t>(code));
            } else {
                fail("unknown entity '&" + ent + ";'");
            }
            i = semi + 1;
        }
        return out;
    }

    XmlNode element() {
        if (peek() != '<') fail("expected '<'");
        pos++;
        XmlNode node;
        node.name = name_token();
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated element <" + node.name + ">");
            if (peek() == '/') {
                pos++;
                if (peek() != '>') fail("expected '>' after '/'");
                pos++;
                return node;
            }
            if (peek() == '>') {
                pos++;
                break;
            }
            std::string key = name_token();
            skip_ws();
            if (peek() != '=') fail("expected '=' after attribute name");
            pos++;
            skip_ws();
            char quote = peek();
            if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
            pos++;
            size_t end = text.find(quote, pos);
            if (end == std::string::npos) fail("unterminated attribute value");
            node.attrs.emplace_back(std::move(key), decode(text.substr(pos, end - pos)));
            pos = end + 1;
        }
        for (;;) {
            skip_misc();
            if (eof()) fail("missing </" + node.name + ">");
            if (peek() != '<') fail("unexpected text content inside <" + node.name + ">");
            if (starts_with("</")) {
                pos += 2;
                std::string closing = name_token();
                if (closing != node.name)
                    fail("mismatched close tag </" + closing + "> for <" + node.name + ">");
                skip_ws();
                if (peek() != '>') fail("expected '>'");
                pos++;
                return node;
            }
            node.children.push_back(element());
        }
    }
};

void write_node(const XmlNode& node, int depth, std::string& out) {
    out.append(static_cast<size_t>(depth) * 2, ' ');
    out += '<';
    out += node.name;
    for (const auto& [k, v] : node.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        out += xml_escape(v);
        out += '"';
    }
    if (node.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const XmlNode& child : node.children) write_node(child, depth + 1, out);
    out.append(static_cast<size_t>(depth) * 2, ' ');
    out += "</";
    out += node.name;
    out += ">\n";
}

}  // namespace

XmlNode xml_parse(const std::string& text) {
    Parser p{text};
    p.skip_misc();
    if (p.eof()) p.fail("empty document");
    XmlNode root = p.element();
    p.skip_misc();
    if (!p.eof()) p.fail("trailing content after root element");
    return root;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string xml_write(const XmlNode& root) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    write_node(root, 0, out);
    return out;
}

}  // namespace rsm
