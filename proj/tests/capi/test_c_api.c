#include <math.h>
#include <stdio.h>
#include <string.h>

#include "membrane/membrane.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const char* kHeat =
    "{\"schema_version\":1,\"horizon\":1.0,"
    "\"left\":{\"drift\":0.0,\"diffusion\":1.0},\"right\":{\"drift\":0.0,\"diffusion\":1.0},"
    "\"membrane\":0.0,\"wentzell\":{\"q1\":0.5,\"q2\":0.5}}";

static void test_status_names(void) {
  EXPECT(strcmp(mbr_status_name(MBR_OK), "Ok") == 0);
  EXPECT(strcmp(mbr_status_name(MBR_SERIES_DIVERGENCE), "SeriesDivergence") == 0);
  EXPECT(strcmp(mbr_status_name(MBR_IO), "Io") == 0);
  EXPECT(strcmp(mbr_status_name((mbr_status)77), "Unknown") == 0);
  EXPECT(strlen(mbr_version()) > 0);
}

static void test_null_arguments(void) {
  mbr_problem* p = NULL;
  EXPECT(mbr_problem_parse(NULL, &p) == MBR_NULL_ARGUMENT);
  EXPECT(mbr_problem_parse(kHeat, NULL) == MBR_NULL_ARGUMENT);
  EXPECT(strstr(mbr_last_error(), "null") != NULL);
  EXPECT(mbr_semigroup_value(NULL, 0, 0, 1, NULL, NULL) == MBR_NULL_ARGUMENT);
  mbr_problem_free(NULL);
  mbr_semigroup_free(NULL);
  mbr_function_free(NULL);
  mbr_config_free(NULL);
  mbr_string_free(NULL);
}

static void test_errors_carry_key(void) {
  mbr_problem* p = NULL;
  EXPECT(mbr_problem_parse("{\"horizon\":1", &p) == MBR_INVALID_INPUT);
  EXPECT(p == NULL);
  EXPECT(mbr_problem_parse("{\"horizon\":1,\"left\":{\"drift\":0}}", &p) == MBR_INVALID_INPUT);
  EXPECT(strstr(mbr_last_error(), "left.diffusion") != NULL);
  EXPECT(mbr_problem_parse(kHeat, &p) == MBR_OK);
  EXPECT(mbr_last_error()[0] == '\0');
  mbr_problem_free(p);
}

static void test_heat_value(void) {
  mbr_problem* p = NULL;
  mbr_function* phi = NULL;
  mbr_semigroup* op = NULL;
  EXPECT(mbr_problem_parse(kHeat, &p) == MBR_OK);
  EXPECT(mbr_function_parse("{\"kind\":\"gaussian-bump\",\"params\":[1.0,0.3,0.5]}", &phi) == MBR_OK);
  double v = 0;
  EXPECT(mbr_function_eval(phi, 0.3, &v) == MBR_OK && fabs(v - 1.0) < 1e-15);
  EXPECT(mbr_semigroup_create(p, &op) == MBR_OK);
  const double xs[3] = {-0.5, 0.0, 0.8};
  double u[3];
  EXPECT(mbr_semigroup_apply(op, 0.0, 1.0, phi, xs, 3, u) == MBR_OK);
  for (int k = 0; k < 3; ++k) {
    const double var = 0.25 + 1.0, d = xs[k] - 0.3;
    EXPECT(fabs(u[k] - 0.5 / sqrt(var) * exp(-d * d / (2 * var))) < 1e-3);
  }
  EXPECT(mbr_semigroup_value(op, 0.0, 0.0, 1.0, phi, &v) == MBR_OK && fabs(v - u[1]) < 1e-12);
  EXPECT(mbr_semigroup_value(op, 1.0, 0.0, 0.5, phi, &v) == MBR_TIME_ORDER);
  mbr_semigroup_free(op);
  mbr_function_free(phi);
  mbr_problem_free(p);
}

static void test_config_commands(void) {
  char json[1024];
  snprintf(json, sizeof json,
           "{\"schema_version\":1,\"name\":\"c-api\",\"problem\":%s,"
           "\"phi\":{\"kind\":\"constant-one\"},\"solve\":{\"s\":[0.0],\"t\":1.0,\"x\":[-1.0,0.0,1.0]},"
           "\"mc\":{\"x\":[0.2],\"paths\":500,\"dt\":0.0025}}",
           kHeat);
  mbr_config* c = NULL;
  EXPECT(mbr_config_parse(json, ".", &c) == MBR_OK);
  char* csv = NULL;
  EXPECT(mbr_solve_csv(c, &csv) == MBR_OK);
  EXPECT(csv && strncmp(csv, "s,x,u,side\n0,-1,1,left\n", 23) == 0);
  mbr_string_free(csv);

  char* report = NULL;
  int pass = 0;
  EXPECT(mbr_check(c, "semigroup", &report, &pass) == MBR_OK);
  EXPECT(pass == 1);
  EXPECT(report && strstr(report, "\"schema_version\": 1") != NULL);
  mbr_string_free(report);
  EXPECT(mbr_check(c, "bogus", &report, &pass) == MBR_INVALID_INPUT);

  char* a = NULL;
  char* b = NULL;
  EXPECT(mbr_config_set_seed(c, 9) == MBR_OK);
  EXPECT(mbr_compare_mc(c, &a, &pass) == MBR_OK);
  EXPECT(mbr_compare_mc(c, &b, &pass) == MBR_OK);
  EXPECT(a && b && strcmp(a, b) == 0);
  EXPECT(strstr(a, "\"seed\": 9") != NULL);
  mbr_string_free(a);
  mbr_string_free(b);
  EXPECT(mbr_config_set_paths(c, 0) == MBR_INVALID_INPUT);
  mbr_config_free(c);

  EXPECT(mbr_config_load("/nonexistent/config.json", &c) == MBR_IO);
}

static void test_skew_density(void) {
  double v = 0;
  EXPECT(mbr_skew_density(0.5, 1.0, 1.0, 0.0, 0.0, &v) == MBR_OK);
  EXPECT(fabs(v - 1.0 / sqrt(2 * 3.14159265358979323846)) < 1e-15);
  EXPECT(mbr_skew_density(1.5, 1.0, 1.0, 0.0, 0.0, &v) == MBR_INVALID_INPUT);
}

int main(void) {
  test_status_names();
  test_null_arguments();
  test_errors_carry_key();
  test_heat_value();
  test_config_commands();
  test_skew_density();
  if (failures) {
    fprintf(stderr, "%d failures\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
