#pragma once
// Certification results: a uniform record of what was checked, at what
// resolution, with re-checkable numeric witnesses. Sampled sups are
// certified at the stated resolution, never claimed rigorous.

#include <map>
#include <string>
#include <vector>

namespace anosov {

enum class CertStatus { Certified, Falsified, Inconclusive };

inline const char* to_string(CertStatus s) {
    switch (s) {
        case CertStatus::Certified: return "certified";
        case CertStatus::Falsified: return "falsified";
        case CertStatus::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct Witness {
    std::string label;
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> arrays;
};

struct Certificate {
    std::string kind;
    CertStatus status = CertStatus::Inconclusive;
    std::map<std::string, double> constants;
    std::map<std::string, double> tolerances;
    std::vector<Witness> witnesses;
    long window_lo = 0;
    long window_hi = 0;
    int grid_n = 0;
    std::vector<std::string> notes;
};

}  // namespace anosov
