// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: levyns_acceptance [--seed N] [--json FILE] [criterion ids...]

#include "levyns/verification.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    levyns::VerifyOptions opt;
    std::string json_out;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--seed" && i + 1 < argc) {
            opt.seed = std::strtoull(argv[++i], nullptr, 10);
        } else if (a == "--json" && i + 1 < argc) {
            json_out = argv[++i];
        } else {
            opt.only.push_back(std::atoi(a.c_str()));
        }
    }
    opt.progress = [](const levyns::CriterionResult& r) { std::cout << levyns::format_result_line(r) << std::endl; };

    const auto results = levyns::run_acceptance(opt);
    int failed = 0;
    for (const auto& r : results) {
        if (!r.pass) ++failed;
        if (r.seconds > r.budget && r.budget > 0.0) {
            std::cout << "note: criterion " << r.id << " exceeded its runtime budget (" << r.seconds << " s > "
                      << r.budget << " s)\n";
        }
    }
    if (!json_out.empty()) std::ofstream(json_out) << levyns::acceptance_report_json(results, opt.seed);
    std::cout << (results.size() - failed) << "/" << results.size() << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
