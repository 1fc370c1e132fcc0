// Runs every acceptance check and prints one verdict line per criterion.
// Exit status is nonzero if any check fails.

#include <cstdio>

#include "honeycomb/verify.hpp"

int main() {
    bool all = true;
    for (const auto& r : honeycomb::run_acceptance_checks()) {
        all = all && r.pass;
        std::printf("criterion %2d [%s] %-45s (%.2fs)%s%s\n", r.id,
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.empty() ? "" : " -- ", r.detail.c_str());
    }
    return all ? 0 : 1;
}
