#include <math.h>
#include <stdio.h>
#include <string.h>
#include "monopole.h"

static int fail(const char *what) {
    char buf[256];
    monopole_last_error(buf, sizeof buf);
    fprintf(stderr, "%s: %s\n", what, buf);
    return 1;
}

int main(void) {
    MonopoleEs *es = NULL;
    MonopoleEsSummary s;
    if (monopole_es_new(1, 1, &es) != MONOPOLE_STATUS_OK) return fail("es_new");
    if (monopole_es_summary(es, &s) != MONOPOLE_STATUS_OK) return fail("es_summary");
    if (fabs(fabs(s.b) - 5.0 * sqrt(2.0)) > 1e-9) return fail("tetrahedral b");
    monopole_es_free(es);

    MonopoleEs *bad = NULL;
    if (monopole_es_new(1, -1, &bad) != MONOPOLE_STATUS_INADMISSIBLE || bad != NULL) return fail("inadmissible pair");
    char msg[128];
    monopole_last_error(msg, sizeof msg);
    if (strstr(msg, "inadmissible") == NULL) return fail("error message");

    MonopolePeriods *p = NULL;
    MonopoleComplex tau[16];
    if (monopole_periods_new(5.0 * sqrt(2.0), &p) != MONOPOLE_STATUS_OK) return fail("periods_new");
    if (monopole_periods_tau(p, tau) != MONOPOLE_STATUS_OK) return fail("periods_tau");
    if (fabs(tau[0].re + 73.0 / 98.0) > 1e-8 || fabs(tau[0].im - 51.0 * sqrt(3.0) / 98.0) > 1e-8) return fail("tau_11");
    monopole_periods_free(p);

    if (monopole_periods_tau(NULL, tau) != MONOPOLE_STATUS_NULL_POINTER) return fail("null handle");
    printf("ok\n");
    return 0;
}
