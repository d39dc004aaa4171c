#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tractforge {

// One checked quantity: a named value, whether it met its threshold, and a
// witness string (edge/vertex ids, coordinates) pinning down where the value
// was achieved.
struct ReportItem {
    std::string name;
    double value = 0.0;
    bool pass = true;
    std::string witness;
};

// Structured result of a verification run. `pass` is the conjunction of all
// item passes unless a hard error forced it false.
struct Report {
    std::string kind;
    bool pass = true;
    std::vector<ReportItem> items;
    std::vector<std::string> notes;

    ReportItem& add(std::string name, double value, bool ok, std::string witness = {}) {
        items.push_back({std::move(name), value, ok, std::move(witness)});
        if (!ok) pass = false;
        return items.back();
    }
    void note(std::string s) { notes.push_back(std::move(s)); }
    const ReportItem* find(const std::string& name) const {
        for (const auto& it : items)
            if (it.name == name) return &it;
        return nullptr;
    }
};

}  // namespace tractforge
