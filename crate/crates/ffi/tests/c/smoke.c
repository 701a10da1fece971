/* Drives the C ABI end to end on a small grid and prints `key value` lines. */
#include "rmhd_sonic.h"
#include <stdio.h>

#define CHECK(call)                                                              \
  do {                                                                           \
    RmhdStatus s_ = (call);                                                      \
    if (s_ != RMHD_STATUS_OK) {                                                  \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, rmhd_last_error());      \
      return 1;                                                                  \
    }                                                                            \
  } while (0)

int main(void) {
  RmhdConfig *cfg = NULL;
  RmhdTable *table = NULL;
  RmhdSolution *sol = NULL;
  RmhdState st;
  RmhdSolveInfo info;
  RmhdRecord recs[16];
  size_t n = 0;
  double rho_star, b, t, r;

  printf("version %s\n", rmhd_version());
  CHECK(rmhd_config_canonical(&cfg));
  CHECK(rmhd_config_set_grid(cfg, 33, 33));
  CHECK(rmhd_table_build(cfg, &table));
  CHECK(rmhd_table_state(table, 0.1, &st));
  CHECK(rmhd_table_sonic(table, &rho_star, &b));
  printf("mach %.17g\nrho_star %.17g\n", st.mach, rho_star);

  if (rmhd_table_state(table, 2.0, &st) != RMHD_STATUS_NUMERICAL || rmhd_last_error() == NULL) {
    return 2;
  }
  printf("range_error %s\n", rmhd_last_error());

  CHECK(rmhd_solve(cfg, &sol));
  CHECK(rmhd_solution_info(sol, &info));
  printf("iterations %zu\n", info.iterations);

  if (rmhd_solution_field(sol, NULL, 0, &n) != RMHD_STATUS_BUFFER_TOO_SMALL) {
    return 3;
  }
  printf("rows %zu\n", n);

  CHECK(rmhd_solution_recover(sol, 4, 4, recs, 16, &n));
  CHECK(rmhd_solution_invert(sol, recs[5].x, recs[5].y, &t, &r));
  printf("invert_gap %.3e\n", t > recs[5].t ? t - recs[5].t : recs[5].t - t);

  rmhd_solution_free(sol);
  rmhd_table_free(table);
  rmhd_config_free(cfg);
  return 0;
}
