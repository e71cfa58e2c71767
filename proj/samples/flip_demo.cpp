// Encircles the exceptional point starting on each eigenbranch and prints how
// the final state sits in the naive (c) and phase-compensated (d) populations.

#include "nonherm/nonherm.hpp"

#include <cstdio>

int main() {
    using namespace nonherm;
    for (const char* name : {"fig5", "fig6"}) {
        const ScenarioResult r = run_scenario(*find_builtin(name));
        const PopulationRecord& last = r.records.back();
        std::printf("%s  start=branch%zu  |c1|=%.3e |c2|=%.3e  |d1|=%.3e |d2|=%.3e  %s\n", name,
                    r.initial_branch + 1, std::abs(last.c[0]), std::abs(last.c[1]), std::abs(last.d[0]),
                    std::abs(last.d[1]), to_string(r.flip.value_or(FlipOutcome::undetermined)));
        if (r.holonomy) {
            std::printf("      branch 1 returns as branch %zu, branch 2 as branch %zu\n", r.holonomy->matched[0] + 1,
                        r.holonomy->matched[1] + 1);
        }
    }
}
