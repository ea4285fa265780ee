/* Minimal C caller: helium singlet-S ladder at Kmax = 16.
 *
 * Build (from the workspace root, after `cargo build -p hyperladder-ffi`):
 *   cc crates/ffi/examples/spectrum.c -Icrates/ffi/include \
 *      -Ltarget/debug -lhyperladder_ffi -lm -o spectrum
 *   LD_LIBRARY_PATH=target/debug ./spectrum
 */
#include <stdio.h>

#include "hyperladder.h"

int main(void) {
    HlStatus status;
    HlSolver *solver = hl_solver_new(2, 2.0, 0, 16, 3, &status);
    if (!solver) {
        fprintf(stderr, "hl_solver_new: %s\n", hl_status_name((int32_t)status));
        return 1;
    }

    status = hl_solver_run(solver);
    if (status != HL_STATUS_OK && status != HL_STATUS_NO_BOUND_STATE) {
        fprintf(stderr, "hl_solver_run: %s\n", hl_status_name((int32_t)status));
        hl_solver_free(solver);
        return 1;
    }

    printf("hyperladder %s, basis %zu channels\n", hl_version(),
           (size_t)hl_solver_basis_size(solver));
    for (size_t n = 0; n < hl_solver_state_count(solver); n++) {
        double lambda, energy;
        hl_solver_lambda(solver, n, &lambda);
        hl_solver_energy(solver, n, &energy);
        printf("n = %zu  lambda = %+.9f  E = %+.9f Hartree\n", n, lambda, energy);
    }

    hl_solver_free(solver);
    return 0;
}
