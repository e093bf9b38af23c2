#include "degsweep/common.hpp"

#include <string>

namespace degsweep {

void require_finite(const Vec& v, std::string_view what) {
    if (!v.allFinite()) {
        throw NonFiniteValue(std::string(what) + ": non-finite coordinate");
    }
}

void require_dim(const Vec& v, Eigen::Index n, std::string_view what) {
    if (v.size() != n) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
    }
}

bool lex_less(const Vec& a, const Vec& b) {
    const Eigen::Index n = std::min(a.size(), b.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a[i] < b[i]) return true;
        if (b[i] < a[i]) return false;
    }
    return a.size() < b.size();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace degsweep
