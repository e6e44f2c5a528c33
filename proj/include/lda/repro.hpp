#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lda::repro {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runs one verification criterion (1..9). Artifacts, when any, go under
// out_dir; pass an empty path to skip writing.
CriterionResult run_criterion(int id, const std::filesystem::path& out_dir);

// Runs all criteria in order and writes a summary CSV to out_dir.
std::vector<CriterionResult> run_all(const std::filesystem::path& out_dir);

int criterion_count();

} // namespace lda::repro
