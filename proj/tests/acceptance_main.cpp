// Acceptance suite: runs every verification criterion at its pinned
// tolerance and prints one PASS/FAIL line per criterion.

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "lda/repro.hpp"

int main(int argc, char** argv) {
    std::filesystem::path out_dir;
    if (argc > 1) out_dir = argv[1];

    bool all_pass = true;
    for (int id = 1; id <= lda::repro::criterion_count(); ++id) {
        lda::repro::CriterionResult r = lda::repro::run_criterion(id, out_dir);
        std::printf("[%s] criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && r.pass;
    }
    std::printf("acceptance: %s\n", all_pass ? "ALL PASS" : "FAILURES PRESENT");
    return all_pass ? EXIT_SUCCESS : EXIT_FAILURE;
}
