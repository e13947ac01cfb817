#include <stdio.h>
#include "grnn_sdr.h"

int main(void) {
    GrnnDataset *ds = NULL;
    if (grnn_dataset_simulate(4, 400, 8, -1.0, 7, &ds) != GRNN_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", grnn_last_error_message());
        return 1;
    }
    GrnnTrainConfig cfg = grnn_train_config_default();
    cfg.epochs = 300;
    cfg.restarts = 1;
    GrnnOutcome *fit = NULL;
    if (grnn_fit(ds, 0.2, &cfg, NULL, &fit) != GRNN_STATUS_OK) {
        fprintf(stderr, "fit: %s\n", grnn_last_error_message());
        grnn_dataset_free(ds);
        return 1;
    }
    size_t p = grnn_outcome_p(fit), d_hat = grnn_outcome_d_hat(fit), d = grnn_dataset_d_true(ds);
    double truth[64], beta[64], r = 0.0;
    grnn_dataset_beta_true(ds, truth, 64);
    grnn_outcome_beta_hat(fit, beta, 64);
    grnn_vector_correlation(truth, p, d, beta, d_hat, &r);
    printf("d_hat %zu  r %.4f\n", d_hat, r);
    grnn_outcome_free(fit);
    grnn_dataset_free(ds);
    return 0;
}
