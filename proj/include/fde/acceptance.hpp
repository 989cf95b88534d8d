#ifndef FDE_ACCEPTANCE_HPP
#define FDE_ACCEPTANCE_HPP

// The acceptance suite: twelve numbered criteria, each reported with the
// measured value, the bound it is held to and a verdict.

#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace fde {

struct CriterionResult {
    int id = 0;
    std::string name;
    double measured = 0.0;
    std::string bound;
    bool pass = false;
    std::string detail;
};

struct AcceptanceOptions {
    bool quick = false;          ///< halves every resolution
    bool flip_b_sign = false;    ///< mutation check: integrate with the wrong sign of b
    std::set<int> only;          ///< empty runs all criteria
    std::ostream* progress = nullptr;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// One line per criterion: id, name, measured, bound, PASS/FAIL, detail.
void print_report(std::ostream& out, const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

/**
 * @brief Largest one-step increase of H along a short rescaled run from long
 *        cylinder data (ell = 6), with T set to the analytic lower bound.
 *
 * Under the correct flow H is nonincreasing. With the sign of b reversed the
 * decaying rho-modes of period above 2 pi/sqrt(n-2) raise H, so the mutation
 * shows up here.
 */
double h_monotone_probe(bool flip_b_sign, int n_rho);

}  // namespace fde

#endif  // FDE_ACCEPTANCE_HPP
