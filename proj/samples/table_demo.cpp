// Reproduces the ladder/crossed table for the four reference cases and prints
// each entry next to the published value.
#include <cstdio>

#include "cbsl/cbs.hpp"

using namespace cbsl;

int main() {
  const char* names[6] = {"L_el", "L_inel_tot", "L_tot", "C_el", "C_inel_tot", "C_tot"};
  for (int k = 0; k < 4; ++k) {
    const auto& tc = cbs::kReferenceTable[k];
    cbs::CaseConfig cfg;
    cfg.s0 = tc.s0;
    cfg.delta = tc.delta;
    const auto row = cbs::table_row(cbs::run_case(cfg), tc.s0, tc.delta);
    std::printf("case (%c): s0 = %g, delta = %g\n", 'a' + k, tc.s0, tc.delta);
    const double* got = &row.L_el;
    const double* ref = &tc.published.L_el;
    for (int j = 0; j < 6; ++j) std::printf("  %-11s %12.4g  published %12.4g\n", names[j], got[j], ref[j]);
    std::printf("  %-11s %12.4f  published %12.3f\n\n", "eta", row.eta, tc.published.eta);
  }
}
