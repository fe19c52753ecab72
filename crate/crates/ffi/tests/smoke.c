#include <stdio.h>
#include <string.h>
#include "swmimo.h"

static const char *CONFIG =
    "[grid]\nf_start_Hz = 1e9\nf_stop_Hz = 1.5e9\ndelta_f_Hz = 1e8\n"
    "[arrays]\nn_rx = 3\nn_tx = 2\n"
    "[circuit]\nregime = \"tight\"\n"
    "[fading]\nblock_len = 64\n";

int main(void) {
    SwmSimulator *sim = NULL;
    if (swm_simulator_from_toml(CONFIG, SWM_REGIME_TIGHT, &sim) != SWM_STATUS_OK) {
        fprintf(stderr, "create: %s\n", swm_last_error_message());
        return 1;
    }
    size_t len = 0, n_r = 0, n_t = 0;
    swm_simulator_grid_len(sim, &len);
    swm_simulator_dims(sim, &n_r, &n_t);
    size_t idx[2] = {0, len - 1};
    SwmRealization *real = NULL;
    if (swm_simulator_realize(sim, 0, idx, 2, &real) != SWM_STATUS_OK) {
        fprintf(stderr, "realize: %s\n", swm_last_error_message());
        return 1;
    }
    SwmComplex h[6];
    if (swm_realization_matrix(real, 1, SWM_MATRIX_CHANNEL, h, 6) != SWM_STATUS_OK) return 1;
    if (swm_realization_matrix(real, 1, SWM_MATRIX_CHANNEL, h, 5) != SWM_STATUS_BUFFER_TOO_SMALL) return 1;
    if (swm_last_error_message() == NULL) return 1;
    double f = 0.0;
    swm_realization_info(real, 1, &f, NULL, NULL);
    printf("%zu %zu %zu %.0f %.6e\n", len, n_r, n_t, f, h[0].re * h[0].re + h[0].im * h[0].im);
    swm_realization_free(real);
    swm_simulator_free(sim);
    return 0;
}
