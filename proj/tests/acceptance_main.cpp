#include <cstdlib>
#include <iostream>
#include <string>

#include "fde/acceptance.hpp"

int main(int argc, char** argv)
{
    fde::AcceptanceOptions opt;
    opt.progress = &std::cerr;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--quick") opt.quick = true;
        else opt.only.insert(std::stoi(a));
    }
    const auto results = fde::run_acceptance(opt);
    fde::print_report(std::cout, results);
    const bool ok = fde::all_passed(results);
    std::cout << (ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << '\n';
    return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
