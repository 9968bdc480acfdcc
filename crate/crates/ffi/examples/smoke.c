#include <stdio.h>
#include "delayswitch.h"
int main(void) {
    double c[4] = {-4, 1, -2, -2};
    DsSystem *s = NULL; DsReport *r = NULL; double tau; DsDirection d;
    if (ds_system_new(c, 4, "own", 0.0, &s) != DS_STATUS_OK) return 1;
    if (ds_switch_report(s, 3.0, &r) != DS_STATUS_OK) return 2;
    ds_report_switch(r, 0, &tau, &d);
    printf("%zu switch at %.6f dir %d\n", ds_report_switch_count(r), tau, d);
    ds_report_free(r); ds_system_free(s);
    return 0;
}
