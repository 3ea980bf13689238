#pragma once

// Shared schema/corpus builders for the test binaries. The two-dimension
// topic x date space mirrors the running example used across the tests:
// a topic classification tree and a calendar tree with ordered years,
// seasons, and months.

#include <string>
#include <vector>

#include "rsm/space.hpp"

namespace rsm::testing {

inline Dimension make_topic_dim() {
    Dimension d;
    d.name = "topic";
    d.relations.push_back({"subclass", false, -1});
    d.add("topic");
    d.add("topic/CS");
    d.add("topic/CS/AI");
    d.add("topic/CS/AI/NLP");
    d.add("topic/CS/AI/ML");
    d.add("topic/CS/DB");
    d.add("topic/CS/DB/INDEX");
    d.add("topic/CS/DB/MODEL");
    d.add("topic/CS/DB/RL");
    d.add("topic/CS/IR");
    d.add("topic/MATH");
    return d;
}

// Calendar with seasons: date/<year>/<season>/<month>, years 2020..2024,
// months grouped three per season. Orders make the tree-wide left-to-right
// sequence match calendar time.
inline Dimension make_date_dim() {
    Dimension d;
    d.name = "date";
    d.relations.push_back({"inclusion", false, -1});
    d.relations.push_back({"year", true, 1});
    d.relations.push_back({"month", true, 3});
    d.add("date");
    const char* seasons[4] = {"Spring", "Summer", "Autumn", "Winter"};
    for (int y = 0; y < 5; y++) {
        std::string year = "date/" + std::to_string(2020 + y);
        d.add(year, y);
        for (int s = 0; s < 4; s++) {
            std::string season = year + "/" + seasons[s];
            d.add(season, s);
            for (int m = 0; m < 3; m++) {
                int month = s * 3 + m + 1;
                std::string name = (month < 10 ? "0" : "") + std::to_string(month);
                d.add(season + "/" + name, m);
            }
        }
    }
    return d;
}

inline ResourceSpace paper_space() {
    ResourceSpace space;
    space.name = "RS";
    space.dims.push_back(make_topic_dim());
    space.dims.push_back(make_date_dim());
    space.finalize();
    return space;
}

// Flat calendar variant: date/<year>/<month> with months directly under
// two ordered years. Level-order `month` relation sits at level 2 here.
inline ResourceSpace flat_month_space() {
    ResourceSpace space;
    space.name = "RS";
    space.dims.push_back(make_topic_dim());
    Dimension d;
    d.name = "date";
    d.relations.push_back({"inclusion", false, -1});
    d.relations.push_back({"year", true, 1});
    d.relations.push_back({"month", true, 2});
    d.add("date");
    for (int y = 0; y < 2; y++) {
        std::string year = "date/" + std::to_string(2020 + y);
        d.add(year, y);
        for (int m = 1; m <= 12; m++) {
            std::string name = (m < 10 ? "0" : "") + std::to_string(m);
            d.add(year + "/" + name, m - 1);
        }
    }
    space.dims.push_back(std::move(d));
    space.finalize();
    return space;
}

}  // namespace rsm::testing
