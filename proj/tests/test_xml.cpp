#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rsm/xml.hpp"

using namespace rsm;

TEST_CASE("minimal element") {
    XmlNode n = xml_parse("<A/>");
    CHECK(n.name == "A");
    CHECK(n.attrs.empty());
    CHECK(n.children.empty());
}

TEST_CASE("attributes and nesting") {
    XmlNode n = xml_parse(R"(<Root a="1" b="two"><Child x='3'/><Child/></Root>)");
    CHECK(n.attr("a") == "1");
    CHECK(n.attr("b") == "two");
    CHECK(n.attr_or("missing", "dflt") == "dflt");
    REQUIRE(n.children.size() == 2);
    CHECK(n.children[0].attr("x") == "3");
    CHECK_THROWS_AS((void)n.attr("zzz"), XmlError);
}

TEST_CASE("declaration comments and whitespace are skipped") {
    XmlNode n = xml_parse("<?xml version=\"1.0\"?>\n<!-- hi -->\n<A>\n  <!-- there -->\n  <B/>\n</A>\n");
    CHECK(n.name == "A");
    REQUIRE(n.children.size() == 1);
    CHECK(n.children[0].name == "B");
}

TEST_CASE("entity decoding") {
    XmlNode n = xml_parse(R"(<A v="a &amp;&lt;&gt;&quot;&apos; b &#65;&#x4E2D;"/>)");
    CHECK(n.attr("v") == "a &<>\"' b A\xE4\xB8\xAD");
}

TEST_CASE("escaping round-trips through the writer") {
    XmlNode n("A");
    n.add_attr("v", "x & <y> \"z\"");
    XmlNode again = xml_parse(xml_write(n));
    CHECK(again.attr("v") == "x & <y> \"z\"");
}

TEST_CASE("canonical writer shape") {
    XmlNode root("A");
    root.add_attr("x", "1");
    root.add_child(XmlNode("B"));
    CHECK(xml_write(root) ==
          "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          "<A x=\"1\">\n"
          "  <B/>\n"
          "</A>\n");
}

TEST_CASE("write then parse is a fixpoint") {
    XmlNode root("Top");
    root.add_attr("name", "n&n");
    XmlNode mid("Mid");
    mid.add_attr("k", "v");
    mid.add_child(XmlNode("Leaf"));
    root.add_child(std::move(mid));
    std::string once = xml_write(root);
    std::string twice = xml_write(xml_parse(once));
    CHECK(once == twice);
}

TEST_CASE("parse errors carry offsets") {
    auto offset_of = [](const std::string& text) {
        try {
            xml_parse(text);
        } catch (const XmlError& e) {
            return e.offset;
        }
        return size_t(0);
    };
    CHECK_THROWS_AS(xml_parse("<A>text</A>"), XmlError);
    CHECK_THROWS_AS(xml_parse("<A><B></A>"), XmlError);
    CHECK_THROWS_AS(xml_parse("<A"), XmlError);
    CHECK_THROWS_AS(xml_parse("<A v=\"&bogus;\"/>"), XmlError);
    CHECK_THROWS_AS(xml_parse("<A/><B/>"), XmlError);
    CHECK_THROWS_AS(xml_parse("   "), XmlError);
    CHECK(offset_of("<A>text</A>") > 0);
    CHECK(offset_of("<A/><B/>") >= 4);
}
