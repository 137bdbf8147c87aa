#include <sublock/sublock.h>

#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                                                                   \
  do {                                                                                                                 \
    if (!(cond)) {                                                                                                     \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, #cond, sl_last_error());                       \
      ++failures;                                                                                                      \
    }                                                                                                                  \
  } while (0)

static const char *c17 = "INPUT(N1)\nINPUT(N2)\nINPUT(N3)\nINPUT(N6)\nINPUT(N7)\nOUTPUT(N22)\nOUTPUT(N23)\n"
                         "N10 = NAND(N1, N3)\nN11 = NAND(N3, N6)\nN16 = NAND(N2, N11)\nN19 = NAND(N11, N7)\n"
                         "N22 = NAND(N10, N16)\nN23 = NAND(N16, N19)\n";

int main(void) {
  EXPECT(strcmp(sl_version(), "0.1.0") == 0);

  sl_netlist *bad = NULL;
  EXPECT(sl_netlist_parse("INPUT(a)\nOUTPUT(y)\ny = FOO(a)\n", &bad) == SL_ERR_PARSE);
  EXPECT(bad == NULL);
  EXPECT(strlen(sl_last_error()) > 0);
  EXPECT(sl_netlist_read_file("/nonexistent/x.bench", &bad) == SL_ERR_IO);
  EXPECT(sl_netlist_parse(NULL, &bad) == SL_ERR_INVALID_ARGUMENT);

  sl_netlist *nl = NULL;
  EXPECT(sl_netlist_parse(c17, &nl) == SL_OK);
  EXPECT(sl_netlist_num_inputs(nl) == 5);
  EXPECT(sl_netlist_num_outputs(nl) == 2);
  EXPECT(sl_netlist_num_gates(nl) == 6);
  EXPECT(sl_netlist_num_keys(nl) == 0);

  sl_lock_config cfg;
  sl_lock_config_default(&cfg);
  EXPECT(cfg.support_sizes_mask == ((1u << 3) | (1u << 4)));
  cfg.budget_key_bits = 4;
  cfg.seed = 7;
  sl_lock_result *res = NULL;
  EXPECT(sl_lock(nl, &cfg, &res) == SL_OK);
  const sl_netlist *locked = sl_lock_result_netlist(res);
  EXPECT(sl_netlist_num_keys(locked) == 4);

  char *keymem = NULL, *verdict = NULL;
  EXPECT(sl_lock_result_keymem_json(res, &keymem) == SL_OK);
  EXPECT(sl_verify(locked, keymem, nl, &verdict) == SL_OK);
  EXPECT(strstr(verdict, "\"ok\": true") != NULL);
  sl_string_free(verdict);
  EXPECT(sl_verify(locked, "{\"blocks\": 3}", nl, &verdict) == SL_ERR_PARSE);

  int status = -1;
  char *report = NULL, *trace = NULL;
  sl_attack_options opt;
  sl_attack_options_default(&opt);
  EXPECT(sl_attack(locked, nl, &opt, &status, &report, &trace) == SL_OK);
  EXPECT(status != SL_ATTACK_KEY_FOUND);
  sl_string_free(report);
  sl_string_free(trace);
  EXPECT(sl_attack(nl, nl, &opt, &status, &report, NULL) == SL_ERR_INVALID_ARGUMENT);

  cfg.budget_key_bits = 40;
  sl_lock_result *none = NULL;
  EXPECT(sl_lock(nl, &cfg, &none) == SL_ERR_INSUFFICIENT_CANDIDATES);
  EXPECT(none == NULL);

  char *text = NULL;
  EXPECT(sl_analyze(2, SL_SCHEME_IDKLL, 0, &text) == SL_OK);
  EXPECT(strstr(text, "\"total\": \"68\"") != NULL);
  sl_string_free(text);
  EXPECT(sl_analyze(25, SL_SCHEME_IDKLL, 0, &text) == SL_ERR_SCALE_BOUND);
  EXPECT(sl_analyze(3, 9, 0, &text) == SL_ERR_INVALID_ARGUMENT);

  sl_string_free(keymem);
  sl_lock_result_free(res);
  sl_netlist_free(nl);
  if (failures)
    fprintf(stderr, "%d failure(s)\n", failures);
  else
    printf("c api: all checks passed\n");
  return failures ? 1 : 0;
}
