/* Compile-and-link smoke test for the generated header.
 *
 *   cargo build -p stagehunt-capi --release
 *   gcc -std=c99 -Wall -Wextra examples/smoke.c -Iinclude \
 *       ../../target/release/libstagehunt_capi.a -lm -o smoke
 *   ./smoke
 */
#include <stdio.h>
#include <string.h>
#include "stagehunt.h"

static int failures = 0;

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            failures++;                                                \
        }                                                              \
    } while (0)

int main(void) {
    CHECK(sh_version() != NULL);

    ShParams *p = sh_params_table1();
    CHECK(p != NULL);

    double a2 = 0.0;
    CHECK(sh_params_get(p, "a2", &a2) == SH_STATUS_OK);
    CHECK(a2 == 0.625);

    CHECK(sh_params_set(p, "nope", 1.0) == SH_STATUS_INVALID_ARGUMENT);
    char msg[128];
    size_t n = sh_last_error(msg, sizeof msg);
    CHECK(n > 0 && strstr(msg, "nope") != NULL);

    ShEquilibrium eq[4];
    size_t count = 0;
    CHECK(sh_equilibria(p, eq, 4, &count) == SH_STATUS_OK);
    CHECK(count == 4);
    CHECK(eq[3].kind == 3);

    double field[4];
    double e2[4] = {1.0, 0.0, 0.0, 0.0};
    CHECK(sh_rhs(p, e2, field) == SH_STATUS_OK);
    CHECK(field[0] == 0.0 && field[1] == 0.0);

    ShTrajectory *traj = NULL;
    double init[4] = {0.2, 0.1, 0.1, 0.01};
    CHECK(sh_simulate(p, init, 2000.0, 1.0, &traj) == SH_STATUS_OK);
    CHECK(sh_trajectory_len(traj) == 2001);
    double t = -1.0, s[4];
    CHECK(sh_trajectory_sample(traj, 2000, &t, s) == SH_STATUS_OK);
    CHECK(t == 2000.0);
    sh_trajectory_free(traj);

    ShBranch *branch = NULL;
    CHECK(sh_continue(p, "b", 0.02, 0.13, &branch) == SH_STATUS_OK);
    CHECK(sh_branch_special_count(branch) == 2);
    int kind = -1;
    double param = 0.0, state[4], l1 = 0.0;
    CHECK(sh_branch_special(branch, 0, &kind, &param, state, &l1) == SH_STATUS_OK);
    sh_branch_free(branch);

    sh_params_free(p);

    if (failures == 0) {
        puts("C ABI smoke test: all checks passed");
        return 0;
    }
    fprintf(stderr, "C ABI smoke test: %d failures\n", failures);
    return 1;
}
