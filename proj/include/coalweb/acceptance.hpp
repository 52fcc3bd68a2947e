#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace coalweb {

struct CriterionResult {
    int id = 0;
    std::string suite;
    std::string target;
    std::string observed;
    std::string tolerance;
    bool pass = false;
};

struct AcceptanceOptions {
    std::uint64_t root_seed = 7;  // pinned default; every sub-run derives from it
    int threads = 0;
};

const std::vector<std::string>& acceptance_suites();

// Runs one registered suite and appends its row.  Returns false for an
// unknown name.
bool run_acceptance_suite(const std::string& name, const AcceptanceOptions& opt,
                          std::vector<CriterionResult>& out);

void print_acceptance_table(std::ostream& os, const std::vector<CriterionResult>& rows);

// Runs `suite` (a registered name or "all"), prints the table, returns 0 iff
// everything passed.  Unknown suite: prints the available names, returns 2.
int acceptance_main(const std::string& suite, const AcceptanceOptions& opt, std::ostream& os);

}  // namespace coalweb
