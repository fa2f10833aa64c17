#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace kcmc {

struct CheckRecord {
    std::string name;
    bool pass = false;
    double worst_value = 0.0;
    std::string worst_location;
    double tolerance = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckRecord> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
    }

    CheckRecord& add(std::string name, bool pass, double worst_value, std::string worst_location,
                     double tolerance, std::string detail = {}) {
        checks.push_back({std::move(name), pass, worst_value, std::move(worst_location), tolerance,
                          std::move(detail)});
        return checks.back();
    }

    void append(const VerificationReport& other) {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    }
};

}  // namespace kcmc
